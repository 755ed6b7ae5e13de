"""Helffer–Sjöstrand calculus on the upper half-plane.

A real test function ``f`` is extended to

    Psi_f(t, eta) = (f(t) + i (f(t + eta) - f(t))) J(eta)

with a smooth cutoff ``J``. With ``dbar = d/dt + i d/deta`` the half-plane
integral

    (1/pi) int_0^inf int dbar Psi_f(x, y) / (lambda - x - i y) dx dy

equals ``f(lambda) - i H[f](lambda)`` for the Hilbert transform with
multiplier ``-i sgn k``. :func:`hs_reconstruct` returns the conjugate, whose
real part is ``f`` and whose imaginary part is ``H[f]``.

Quadrature is tensor-product Gauss–Legendre. The ``y`` axis is cut into
dyadic panels accumulating at 0 (down to ``2^-30``, below which the
integrand is negligible since ``dbar Psi_f`` vanishes like ``y^alpha``) plus
the cutoff region ``[1/4, 1]``. For each ``y`` the singular ``x`` integral is
mapped by ``x = lambda + y sinh(u)``, which turns the kernel into the smooth
``-cosh(u) / (sinh(u) + i)``, and is split at the points where ``f`` or
``f(. + y)`` leave their support. A test function without compact support is
cut to the window outside which it and its derivative are negligible (see
:func:`effective_support`). The error estimate is the difference between two
rule orders on the same panels.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .conf import settings
from .ensembles import Spectrum
from .exceptions import ConfigurationError, QuadratureError
from .spectral import MesoFrame
from .testfunctions import TestFunction

__all__ = [
    "CutoffProfile",
    "AlmostAnalyticExtension",
    "cutoff_profile",
    "psi",
    "dbar_psi",
    "dbar_decay_exponent",
    "effective_support",
    "hs_integral",
    "hs_reconstruct",
    "hs_linear_statistic",
]

logger = logging.getLogger(__name__)

# Dyadic levels of the y panels below 1/4.
Y_LEVELS = 28
# Subpanels per support segment of the inner u integral.
U_SUBPANELS = 12
RULE_ORDERS = (20, 30)
# Share of the quadrature tolerance left to truncating a non-compact test function.
TAIL_FRACTION = 0.1
MAX_RADIUS = 2.0**20


def _smoothstep(u):
    return u**3 * (10 - 15 * u + 6 * u * u)


def _smoothstep_derivative(u):
    return 30 * u * u * (1 - u) ** 2


@dataclass(frozen=True)
class CutoffProfile:
    """``J = 1`` below ``eta_lo``, ``0`` above 1, a quintic smoothstep between."""

    eta_lo: float = 0.25
    max_abs_derivative: float = field(init=False)

    def __post_init__(self):
        if not 0 < self.eta_lo < 1:
            raise ConfigurationError(f"eta_lo must lie in (0, 1), got {self.eta_lo}")
        # max of S' is 15/8 at u = 1/2
        object.__setattr__(self, "max_abs_derivative", 15 / 8 / (1 - self.eta_lo))

    def _u(self, eta):
        return np.clip((np.asarray(eta, dtype=float) - self.eta_lo) / (1 - self.eta_lo), 0.0, 1.0)

    def J(self, eta):
        return 1 - _smoothstep(self._u(eta))

    def dJ(self, eta):
        eta = np.asarray(eta, dtype=float)
        inside = (eta > self.eta_lo) & (eta < 1)
        return np.where(inside, -_smoothstep_derivative(self._u(eta)) / (1 - self.eta_lo), 0.0)


def cutoff_profile(eta_lo: float = 0.25) -> CutoffProfile:
    return CutoffProfile(eta_lo)


@dataclass(frozen=True)
class AlmostAnalyticExtension:
    f: TestFunction
    cutoff: CutoffProfile = field(default_factory=CutoffProfile)


def psi(ext: AlmostAnalyticExtension, t, eta):
    """``Psi_f(t, eta)``."""
    t = np.asarray(t, dtype=float)
    eta = np.asarray(eta, dtype=float)
    ft = ext.f.f(t)
    return (ft + 1j * (ext.f.f(t + eta) - ft)) * ext.cutoff.J(eta)


def dbar_psi(ext: AlmostAnalyticExtension, t, eta):
    """``(d/dt + i d/deta) Psi_f``, evaluated from ``f`` and ``f'`` directly."""
    t = np.asarray(t, dtype=float)
    eta = np.asarray(eta, dtype=float)
    f, df, cutoff = ext.f.f, ext.f.df, ext.cutoff
    ft, fs = f(t), f(t + eta)
    dft, dfs = df(t), df(t + eta)
    return (dft - dfs + 1j * (dfs - dft)) * cutoff.J(eta) + (1j * ft - (fs - ft)) * cutoff.dJ(eta)


def dbar_decay_exponent(ext: AlmostAnalyticExtension, t: float, etas=None) -> float:
    """Slope of ``log |dbar Psi_f(t, eta)|`` against ``log eta`` as ``eta -> 0``."""
    etas = np.logspace(-4, -2, 9) if etas is None else np.asarray(etas, dtype=float)
    magnitude = np.abs(dbar_psi(ext, np.full_like(etas, t), etas))
    if np.any(magnitude == 0):
        raise ConfigurationError(f"dbar Psi vanishes at t={t}; the decay exponent is undefined")
    slope, _ = np.polyfit(np.log(etas), np.log(magnitude), 1)
    return float(slope)


@lru_cache(maxsize=8)
def _unit_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre nodes and weights on ``[0, 1]``."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return (nodes + 1) / 2, weights / 2


@lru_cache(maxsize=8)
def _y_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    edges = np.concatenate([0.25 * 2.0 ** -np.arange(Y_LEVELS, 0, -1), [0.25, 0.5, 0.75, 1.0]])
    nodes, weights = _unit_rule(order)
    widths = np.diff(edges)
    return (edges[:-1, None] + widths[:, None] * nodes).ravel(), (widths[:, None] * weights).ravel()


def _half_plane_integral(ext: AlmostAnalyticExtension, lam: float, order: int, window: tuple[float, float]) -> complex:
    a, b = window
    y, wy = _y_rule(order)
    # Breakpoints of the x integrand mapped to u; the x range is [a - y, b].
    cuts = np.stack([a - y, a + 0 * y, b - y, b + 0 * y], axis=1)
    u_cuts = np.arcsinh((cuts - lam) / y[:, None])
    lo, hi = u_cuts[:, 0], u_cuts[:, 3]
    breaks = np.sort(np.column_stack([lo, np.clip(u_cuts[:, 1:3], lo[:, None], hi[:, None]), hi]), axis=1)
    widths = np.diff(breaks, axis=1) / U_SUBPANELS
    fractions = np.arange(U_SUBPANELS) / U_SUBPANELS
    nodes, weights = _unit_rule(order)
    left = breaks[:, :-1, None] + np.diff(breaks, axis=1)[:, :, None] * fractions
    u = left[..., None] + widths[:, :, None, None] * nodes
    wu = np.broadcast_to(widths[:, :, None, None] * weights, u.shape)
    yy = y[:, None, None, None]
    x = lam + yy * np.sinh(u)
    integrand = dbar_psi(ext, x, np.broadcast_to(yy, u.shape)) * (-np.cosh(u) / (np.sinh(u) + 1j)) * wu
    inner = integrand.reshape(y.size, -1).sum(axis=1)
    return complex(np.sum(wy * inner) / math.pi)


@lru_cache(maxsize=64)
def effective_support(f: TestFunction, tol: float) -> tuple[float, float]:
    """Support of ``f``, or the smallest symmetric window outside which
    ``|f| + |f'|`` stays below ``TAIL_FRACTION * tol * min(1, beta)``.

    The tail is sampled on a geometric grid of radii up to ``MAX_RADIUS``.

    :raises ConfigurationError: if ``f`` does not decay below the threshold within ``MAX_RADIUS``.
    """
    if f.support is not None:
        return f.support
    threshold = TAIL_FRACTION * tol * min(1.0, f.beta)
    radii = np.geomspace(1.0 / 16, MAX_RADIUS, 1024)
    x = np.concatenate([-radii, radii])
    tail = np.abs(f.f(x)) + np.abs(f.df(x))
    tail = np.maximum(tail[: radii.size], tail[radii.size :])
    # largest tail at or beyond each radius
    outside = np.maximum.accumulate(tail[::-1])[::-1]
    below = np.nonzero(outside <= threshold)[0]
    if below.size == 0:
        raise ConfigurationError(f"{f.name} does not decay below {threshold:.1e} within |x| <= {MAX_RADIUS:g}")
    radius = float(radii[below[0]])
    logger.debug("Truncating %s to [-%g, %g] for tolerance %g", f.name, radius, radius, tol)
    return -radius, radius


def hs_integral(ext: AlmostAnalyticExtension, lam: float, tol: float | None = None) -> tuple[complex, float]:
    """``(1/pi) int int dbar Psi_f(x, y) / (lam - x - i y) dx dy`` and its error estimate.

    :raises QuadratureError: if the estimated error exceeds ``tol``.
    """
    tol = settings.HS_TOL if tol is None else tol
    window = effective_support(ext.f, tol)
    low, high = (_half_plane_integral(ext, float(lam), order, window) for order in RULE_ORDERS)
    error = abs(high - low)
    if error > tol:
        raise QuadratureError(
            f"Helffer–Sjöstrand quadrature at lambda={lam} missed tolerance {tol:g} (error {error:.2e})",
            estimate=high,
            error=error,
        )
    return high, error


def hs_reconstruct(ext: AlmostAnalyticExtension, lam: float, tol: float | None = None) -> complex:
    """``f(lam) + i H[f](lam)`` from the half-plane integral."""
    value, _ = hs_integral(ext, lam, tol)
    return value.conjugate()


def hs_linear_statistic(
    spectrum: Spectrum, frame: MesoFrame, ext: AlmostAnalyticExtension, tol: float | None = None
) -> float:
    """``sum_j f(x_j)`` with ``x_j = d_N (E - lambda_j)``, each term by quadrature.

    :raises QuadratureError: if any term misses ``tol``.
    """
    rescaled = frame.d_n * (frame.energy - spectrum.eigenvalues)
    total = math.fsum(hs_integral(ext, x, tol)[0].real for x in rescaled)
    logger.debug("HS linear statistic of %s over %d eigenvalues: %.6g", ext.f.name, rescaled.size, total)
    return total
