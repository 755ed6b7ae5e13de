"""Finite-N observables of a spectrum.

Stieltjes transforms, the mesoscopic resolvent trace, linear statistics and
the log-characteristic-polynomial process, together with the semicircle law
they are compared against.

Mesoscopic points are written ``z = E + (tau + i eta) / d_N`` where the frame
(:class:`MesoFrame`) fixes ``E`` and ``d_N = n**gamma``.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import scipy.integrate
import scipy.stats

from .constants import THEOREM_GAMMA_BOUND, Regime
from .ensembles import Spectrum
from .exceptions import ConfigurationError

__all__ = [
    "MesoFrame",
    "MesoPoint",
    "semicircle_density",
    "semicircle_cdf",
    "semicircle_stieltjes",
    "semicircle_stieltjes_quadrature",
    "semicircle_ks",
    "empirical_stieltjes",
    "resolvent_trace",
    "resolvent_traces",
    "centered_V",
    "linear_statistic",
    "log_char_process",
    "log_char_quadrature",
]

# Above this size spectral sums use compensated summation.
COMPENSATED_SUM_THRESHOLD = 10_000


@dataclass(frozen=True)
class MesoFrame:
    """Observation window around ``energy`` at scale ``1 / d_N``.

    ``d_N`` defaults to ``n ** gamma`` and must then satisfy ``1 < d_N < n``.
    An explicit ``d_n`` override only needs to be positive; with ``d_N >= n``
    the frame is microscopic.
    """

    energy: float
    gamma: float
    n: int
    d_n_override: float | None = None

    def __post_init__(self):
        if not -2 < self.energy < 2:
            raise ConfigurationError(f"Energy must lie in the bulk (-2, 2), got {self.energy}")
        if not 0 < self.gamma < 1:
            raise ConfigurationError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.n < 1:
            raise ConfigurationError(f"n must be positive, got {self.n}")
        self._check_scale()

    def _check_scale(self):
        if self.d_n_override is None:
            if not 1 < self.d_n < self.n:
                raise ConfigurationError(f"d_N = n**gamma = {self.d_n} must satisfy 1 < d_N < n = {self.n}")
        elif self.d_n_override <= 0:
            raise ConfigurationError(f"d_N override must be positive, got {self.d_n_override}")

    @property
    def d_n(self) -> float:
        if self.d_n_override is not None:
            return float(self.d_n_override)
        return float(self.n) ** self.gamma

    @property
    def regime(self) -> str:
        if self.d_n >= self.n:
            return Regime.MICROSCOPIC
        if self.d_n_override is None and self.gamma < THEOREM_GAMMA_BOUND:
            return Regime.THEOREM
        return Regime.OUTSIDE

    def point(self, p: MesoPoint) -> complex:
        """The spectral parameter ``E + (tau + i eta) / d_N``."""
        return self.energy + p.z / self.d_n

    def to_dict(self) -> dict:
        return {
            "energy": self.energy,
            "gamma": self.gamma,
            "n": self.n,
            "d_n": self.d_n,
            "d_n_override": self.d_n_override,
            "regime": self.regime,
        }


@dataclass(frozen=True, slots=True)
class MesoPoint:
    """A point ``tau + i eta`` of the upper half-plane."""

    tau: float
    eta: float

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigurationError(f"eta must be strictly positive, got {self.eta}")

    @property
    def z(self) -> complex:
        return complex(self.tau, self.eta)

    @classmethod
    def from_complex(cls, z: complex) -> MesoPoint:
        return cls(float(z.real), float(z.imag))

    def to_dict(self) -> dict:
        return {"tau": self.tau, "eta": self.eta}


def semicircle_density(x):
    """``sqrt(4 - x^2) / (2 pi)`` on ``[-2, 2]``, zero outside."""
    x = np.asarray(x, dtype=float)
    inside = np.clip(4.0 - x * x, 0.0, None)
    result = np.sqrt(inside) / (2 * np.pi)
    return float(result) if result.ndim == 0 else result


def semicircle_cdf(x):
    """Distribution function of the semicircle law."""
    x = np.clip(np.asarray(x, dtype=float), -2.0, 2.0)
    result = 0.5 + x * np.sqrt(4.0 - x * x) / (4 * np.pi) + np.arcsin(x / 2) / np.pi
    return float(result) if result.ndim == 0 else result


def semicircle_stieltjes(z: complex) -> complex:
    """Closed form ``s(z) = (-z + sqrt(z^2 - 4)) / 2`` with ``Im s > 0``.

    The branch is fixed by writing ``sqrt(z^2 - 4) = sqrt(z - 2) sqrt(z + 2)``
    with principal roots, which is analytic off ``[-2, 2]`` and behaves like
    ``z`` at infinity.
    """
    z = complex(z)
    if not z.imag > 0:
        raise ConfigurationError(f"s(z) is evaluated on the upper half-plane, got Im z = {z.imag}")
    root = np.sqrt(z - 2) * np.sqrt(z + 2)
    return complex((-z + root) / 2)


def semicircle_stieltjes_quadrature(z: complex, epsabs: float = 1e-13, epsrel: float = 1e-13) -> complex:
    """``(1/2pi) int (x - z)^-1 sqrt(4 - x^2) dx`` by adaptive Gauss–Kronrod.

    The substitution ``x = 2 sin(theta)`` removes the square-root endpoint
    singularities: the integrand becomes ``2 cos(theta)^2 / (pi (2 sin(theta) - z))``.
    """
    z = complex(z)

    def integrand(theta: float) -> complex:
        return 2 * math.cos(theta) ** 2 / (math.pi * (2 * math.sin(theta) - z))

    points = None
    if abs(z.real) < 2:
        points = [math.asin(z.real / 2)]
    real, _ = scipy.integrate.quad(
        lambda t: integrand(t).real, -math.pi / 2, math.pi / 2, epsabs=epsabs, epsrel=epsrel, points=points, limit=500
    )
    imag, _ = scipy.integrate.quad(
        lambda t: integrand(t).imag, -math.pi / 2, math.pi / 2, epsabs=epsabs, epsrel=epsrel, points=points, limit=500
    )
    return complex(real, imag)


def semicircle_ks(spectrum: Spectrum) -> float:
    """Kolmogorov–Smirnov distance between the spectral CDF and the semicircle CDF."""
    return float(scipy.stats.kstest(spectrum.eigenvalues, semicircle_cdf).statistic)


def _sum(terms: np.ndarray) -> complex:
    if terms.size > COMPENSATED_SUM_THRESHOLD:
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    return complex(terms.sum())


def empirical_stieltjes(spectrum: Spectrum, z: complex) -> complex:
    """``s_N(z) = N^-1 sum_j (lambda_j - z)^-1``."""
    z = complex(z)
    if z.imag == 0:
        raise ConfigurationError("The Stieltjes transform is evaluated off the real axis")
    return _sum(1.0 / (spectrum.eigenvalues - z)) / spectrum.n


def resolvent_trace(spectrum: Spectrum, frame: MesoFrame, p: MesoPoint) -> complex:
    """``Tr G(E + z/d_N) = sum_j (lambda_j - E - (tau + i eta)/d_N)^-1``."""
    return _sum(1.0 / (spectrum.eigenvalues - frame.point(p)))


def resolvent_traces(spectrum: Spectrum, frame: MesoFrame, points: Sequence[MesoPoint]) -> np.ndarray:
    """:func:`resolvent_trace` at every grid point."""
    return np.array([resolvent_trace(spectrum, frame, p) for p in points])


def centered_V(traces, d_n: float) -> np.ndarray:
    """Center and normalize resolvent traces at one grid point.

    The expectation is replaced by the mean over the Monte Carlo samples:
    ``V_m = (trace_m - mean(trace)) / d_N``.

    :param traces: Complex traces over ``M >= 2`` samples (axis 0); extra
        axes are treated as independent grid points.
    """
    traces = np.asarray(traces, dtype=complex)
    if traces.shape[0] < 2:
        raise ConfigurationError(f"Centering needs at least 2 samples, got {traces.shape[0]}")
    return (traces - traces.mean(axis=0)) / d_n


def linear_statistic(spectrum: Spectrum, frame: MesoFrame, f) -> float:
    """``sum_j f(d_N (E - lambda_j))``.

    :param f: A :class:`~mesowigner.testfunctions.TestFunction` or any
        vectorized callable.
    """
    evaluate = getattr(f, "f", f)
    values = np.asarray(evaluate(frame.d_n * (frame.energy - spectrum.eigenvalues)))
    return float(np.real(_sum(values.astype(complex))))


def log_char_process(spectrum: Spectrum, frame: MesoFrame, tau: float, eta: float) -> float:
    """``log|det(H - E - (tau + i eta)/d_N)| - log|det(H - E - i eta/d_N)|``.

    Evaluated eigenvalue by eigenvalue.
    """
    if not eta > 0:
        raise ConfigurationError(f"eta must be strictly positive, got {eta}")
    shifted = spectrum.eigenvalues - frame.energy
    moved = np.log(np.abs(shifted - complex(tau, eta) / frame.d_n))
    base = np.log(np.abs(shifted - 1j * eta / frame.d_n))
    return float(_sum((moved - base).astype(complex)).real)


def log_char_quadrature(spectrum: Spectrum, frame: MesoFrame, tau: float, eta: float, step: float = 1e-3) -> float:
    """Trapezoid oracle for :func:`log_char_process`.

    ``W(tau) = -int_0^tau Re Tr G(E + (t + i eta)/d_N) / d_N dt``.
    """
    count = max(int(math.ceil(abs(tau) / step)), 1)
    ts = np.linspace(0.0, tau, count + 1)
    shifted = spectrum.eigenvalues - frame.energy
    integrand = np.array([_sum(1.0 / (shifted - complex(t, eta) / frame.d_n)).real for t in ts]) / frame.d_n
    return -float(scipy.integrate.trapezoid(integrand, ts))
