"""Gaussian limit processes.

* ``Gamma'+_H``: the stationary complex Gaussian process on the upper
  half-plane with covariance ``E X(z1) conj(X(z2)) = s^-(2 - 2H)``,
  ``s = (eta1 + eta2) - i (tau1 - tau2)``. It is sampled either from its
  Cayley-transform power series or by pivoted Cholesky on a grid.
* ``B0``: the regularized H = 0 fractional Brownian motion with increment
  variance ``1/2 log(1 + (t - s)^2 / eta^2)``.

The series is

    X(z) = c * ((z + i)/2)^(2H - 2) / sqrt(2) * sum_k c_k w^k (xi1_k + i xi2_k),
    w = (z - i)/(z + i),  c_k^2 = Gamma(p + k) / (Gamma(p) k!),  p = 2 - 2H,

with standard real Gaussians ``xi``. As printed, without the constant ``c``,
its covariance is ``(s/2)^-p``; the default ``c = 2^(H - 1)`` restores
``s^-p``.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.integrate
import scipy.special

from .conf import settings
from .constants import PathOrigin
from .exceptions import ConfigurationError, NotPositiveSemidefinite, TruncationError
from .spectral import MesoPoint

__all__ = [
    "HurstParam",
    "ComplexGaussianSpec",
    "GPPath",
    "gamma_covariance",
    "gamma_covariance_matrix",
    "default_normalization",
    "series_coefficients",
    "binomial_series",
    "series_covariance",
    "truncation_error",
    "check_truncation",
    "series_truncation_order",
    "cayley_series_samples",
    "cayley_series_sample",
    "pivoted_cholesky",
    "cholesky_gp_samples",
    "cholesky_gp_sample",
    "b0_increment_variance",
    "kernel_increment_variance",
    "b0_covariance",
    "b0_samples",
    "b0_sample",
    "integrated_gamma_samples",
    "integrated_gamma_sample",
    "sine_process_covariance",
    "sinc_squared",
]

logger = logging.getLogger(__name__)

# Target memory per batch of series draws, in complex numbers.
_BATCH_ELEMENTS = 1 << 22


@dataclass(frozen=True, slots=True)
class HurstParam:
    H: float

    def __post_init__(self):
        if not self.H < 1:
            raise ConfigurationError(f"Hurst parameter must be < 1, got H={self.H}")

    @property
    def exponent(self) -> float:
        """``p = 2 - 2H``, the power of the covariance kernel."""
        return 2.0 - 2.0 * self.H

    @classmethod
    def coerce(cls, h: HurstParam | float) -> HurstParam:
        return h if isinstance(h, cls) else cls(float(h))


@dataclass(frozen=True)
class ComplexGaussianSpec:
    """A centred circular complex Gaussian vector on a grid of points."""

    points: tuple[MesoPoint, ...]
    covariance: np.ndarray
    pseudo: np.ndarray = field(default=None)

    def __post_init__(self):
        points = tuple(self.points)
        covariance = np.asarray(self.covariance, dtype=complex)
        m = len(points)
        if m == 0:
            raise ConfigurationError("A Gaussian spec needs at least one point")
        if covariance.shape != (m, m):
            raise ConfigurationError(f"Covariance must be {m}x{m}, got {covariance.shape}")
        if not np.allclose(covariance, covariance.conj().T, rtol=1e-12, atol=1e-14):
            raise ConfigurationError("Covariance must be Hermitian")
        pseudo = np.zeros((m, m), dtype=complex) if self.pseudo is None else np.asarray(self.pseudo, dtype=complex)
        if np.any(pseudo != 0):
            raise ConfigurationError("Only circular (zero pseudo-covariance) vectors are supported")
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "covariance", covariance)
        object.__setattr__(self, "pseudo", pseudo)

    @classmethod
    def gamma(cls, points: Sequence[MesoPoint], h: HurstParam | float = 0.0) -> ComplexGaussianSpec:
        """Spec of ``Gamma'+_H`` on ``points``."""
        return cls(tuple(points), gamma_covariance_matrix(points, h))


@dataclass(frozen=True)
class GPPath:
    points: tuple[MesoPoint, ...]
    values: np.ndarray
    origin: PathOrigin
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.points) != len(self.values):
            raise ConfigurationError(f"{len(self.values)} values for {len(self.points)} points")


def _check_points(points: Sequence[MesoPoint]) -> np.ndarray:
    z = np.array([complex(p.tau, p.eta) for p in points])
    if z.size == 0:
        raise ConfigurationError("At least one point is required")
    if np.any(z.imag <= 0):
        raise ConfigurationError("All points must lie in the upper half-plane")
    return z


def gamma_covariance(z1: MesoPoint, z2: MesoPoint, h: HurstParam | float = 0.0) -> complex:
    """``E Gamma'+_H(z1) conj(Gamma'+_H(z2))``.

    Computed as ``((eta1 + eta2) - i (tau1 - tau2)) ** -(2 - 2H)`` with the
    principal power; the base has positive real part, so the value is
    continuous in both points. For H = 0 this is the reciprocal square
    ``1 / (i (z1 - conj z2))^2``.
    """
    p = HurstParam.coerce(h).exponent
    if not (z1.eta > 0 and z2.eta > 0):
        raise ConfigurationError("gamma_covariance needs eta > 0 at both points")
    s = complex(z1.eta + z2.eta, -(z1.tau - z2.tau))
    if p == 2.0:
        return 1 / (s * s)
    return s ** (-p)


def gamma_covariance_matrix(points: Sequence[MesoPoint], h: HurstParam | float = 0.0) -> np.ndarray:
    z = _check_points(points)
    p = HurstParam.coerce(h).exponent
    # (eta_a + eta_b) - i (tau_a - tau_b)
    s = -1j * (z[:, None] - z.conj()[None, :])
    if p == 2.0:
        return 1 / (s * s)
    return np.power(s, -p)


def default_normalization(h: HurstParam | float) -> float:
    """``2^(H - 1)``: aligns the series with :func:`gamma_covariance`."""
    return 2.0 ** (HurstParam.coerce(h).H - 1)


def series_coefficients(terms: int, h: HurstParam | float) -> np.ndarray:
    """``c_k = sqrt(Gamma(p + k) / (Gamma(p) k!))`` for ``k < terms``, via log-gamma."""
    p = HurstParam.coerce(h).exponent
    k = np.arange(terms, dtype=float)
    return np.exp(0.5 * (scipy.special.gammaln(p + k) - scipy.special.gammaln(p) - scipy.special.gammaln(k + 1)))


def binomial_series(x: complex, h: HurstParam | float, terms: int) -> complex:
    """Partial sum of ``sum_k c_k^2 x^k``, which tends to ``(1 - x)^-p``."""
    coefficients = series_coefficients(terms, h) ** 2
    powers = np.power(complex(x), np.arange(terms))
    return complex(np.sum(coefficients * powers))


def _cayley(z: np.ndarray, h: HurstParam) -> tuple[np.ndarray, np.ndarray]:
    """Cayley variable ``w`` and prefactor ``((z + i)/2)^(2H - 2)``."""
    return (z - 1j) / (z + 1j), np.power((z + 1j) / 2, -h.exponent)


def series_covariance(
    z1: MesoPoint, z2: MesoPoint, h: HurstParam | float, terms: int, normalization: float | None = None
) -> complex:
    """Exact covariance of the series truncated to ``terms`` terms."""
    h = HurstParam.coerce(h)
    if normalization is None:
        normalization = default_normalization(h)
    w, prefactor = _cayley(_check_points([z1, z2]), h)
    total = binomial_series(w[0] * np.conj(w[1]), h, terms)
    return complex(normalization**2 * prefactor[0] * np.conj(prefactor[1]) * total)


def _relative_tail(r2: float, p: float, k: np.ndarray) -> np.ndarray:
    """Bound on the tail standard deviation beyond ``k`` terms, relative to the marginal one.

    The tail ``sum_{j >= k} c_j^2 r^2j`` is bounded by a geometric series with
    ratio ``rho_k r^2``, where ``rho_k = max(1, (p + k)/(k + 1))`` bounds the
    coefficient ratios beyond ``k``.
    """
    log_c2 = scipy.special.gammaln(p + k) - scipy.special.gammaln(p) - scipy.special.gammaln(k + 1)
    ratio = np.maximum(1.0, (p + k) / (k + 1)) * r2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        tail = np.where(ratio < 1, np.exp(log_c2 + k * math.log(r2)) / (1 - ratio), np.inf)
    return np.sqrt(tail * (1 - r2) ** p)


def _max_radius_squared(points: Sequence[MesoPoint], h: HurstParam) -> float:
    w, _ = _cayley(_check_points(points), h)
    r2 = float(np.max(np.abs(w))) ** 2
    if r2 >= 1.0:
        raise TruncationError(f"Cayley variable |w|={math.sqrt(r2)} is not inside the unit disk")
    return r2


def truncation_error(points: Sequence[MesoPoint], h: HurstParam | float, terms: int) -> float:
    """Bound on the relative standard deviation neglected by keeping ``terms`` terms."""
    h = HurstParam.coerce(h)
    r2 = _max_radius_squared(points, h)
    if r2 == 0.0:
        return 0.0
    return float(_relative_tail(r2, h.exponent, np.array([float(terms)]))[0])


def check_truncation(
    points: Sequence[MesoPoint], h: HurstParam | float, terms: int, tol: float | None = None
) -> float:
    """Reject a truncation order whose neglected tail exceeds ``tol`` of the marginal standard deviation.

    :raises TruncationError: if the geometric tail bound at ``terms`` is above ``tol``.
    """
    tol = settings.SERIES_TOL if tol is None else tol
    error = truncation_error(points, h, terms)
    if error > tol:
        raise TruncationError(
            f"Series tail at {terms} terms is {error:.3g} of the marginal standard deviation, above {tol:g}"
        )
    return error


def series_truncation_order(
    points: Sequence[MesoPoint], h: HurstParam | float, tol: float | None = None, max_terms: int | None = None
) -> int:
    """Smallest number of terms whose neglected tail has standard deviation
    at most ``tol`` times the marginal standard deviation, at every point.

    :raises TruncationError: if no order up to ``max_terms`` suffices.
    """
    h = HurstParam.coerce(h)
    tol = settings.SERIES_TOL if tol is None else tol
    max_terms = settings.SERIES_MAX_TERMS if max_terms is None else max_terms
    r2 = _max_radius_squared(points, h)
    if r2 == 0.0:
        return 1
    k = np.arange(1, max_terms + 1, dtype=float)
    good = np.nonzero(_relative_tail(r2, h.exponent, k) <= tol)[0]
    if good.size == 0:
        raise TruncationError(
            f"Series tail exceeds {tol:g} of the marginal standard deviation at {max_terms} terms "
            f"(|w|={math.sqrt(r2):.6f})"
        )
    terms = int(k[good[0]])
    logger.debug("Cayley series truncated at K=%d (|w|max=%.4f, H=%g)", terms, math.sqrt(r2), h.H)
    return terms


def cayley_series_samples(
    points: Sequence[MesoPoint],
    h: HurstParam | float,
    rng: np.random.Generator,
    count: int,
    terms: int | None = None,
    normalization: float | None = None,
) -> np.ndarray:
    """``count`` independent joint draws of the truncated series.

    :returns: complex array of shape ``(count, len(points))``.
    """
    h = HurstParam.coerce(h)
    z = _check_points(points)
    if terms is None:
        terms = series_truncation_order(points, h)
    if terms < 1:
        raise ConfigurationError(f"At least one series term is required, got {terms}")
    check_truncation(points, h, terms)
    if normalization is None:
        normalization = default_normalization(h)
    w, prefactor = _cayley(z, h)
    basis = series_coefficients(terms, h)[:, None] * np.power(w[None, :], np.arange(terms)[:, None])
    scale = normalization * prefactor / math.sqrt(2)
    batch = max(1, _BATCH_ELEMENTS // terms)
    out = np.empty((count, z.size), dtype=complex)
    for start in range(0, count, batch):
        stop = min(count, start + batch)
        xi = rng.standard_normal((2, stop - start, terms))
        out[start:stop] = ((xi[0] + 1j * xi[1]) @ basis) * scale
    return out


def cayley_series_sample(
    points: Sequence[MesoPoint],
    h: HurstParam | float,
    rng: np.random.Generator,
    terms: int | None = None,
    normalization: float | None = None,
) -> GPPath:
    """One joint draw of ``Gamma'+_H`` at ``points`` from the Cayley series."""
    h = HurstParam.coerce(h)
    if terms is None:
        terms = series_truncation_order(points, h)
    if normalization is None:
        normalization = default_normalization(h)
    values = cayley_series_samples(points, h, rng, 1, terms, normalization)[0]
    return GPPath(
        tuple(points),
        values,
        PathOrigin.CAYLEY_SERIES,
        {"H": h.H, "K": terms, "normalization": normalization},
    )


def _check_variances(diagonal: np.ndarray, tol: float, label: str) -> None:
    if diagonal.min() < -tol:
        raise NotPositiveSemidefinite(f"{label} {diagonal.min():.3e} below -{tol:.3e}")


def _pivot_column(covariance: np.ndarray, columns: list[np.ndarray], pivot: int, variance: float) -> np.ndarray:
    column = covariance[:, pivot].astype(np.result_type(covariance, float), copy=True)
    for previous in columns:
        column -= previous * np.conj(previous[pivot])
    return column / math.sqrt(variance)


def pivoted_cholesky(covariance: np.ndarray, rtol: float | None = None) -> np.ndarray:
    """Factor a Hermitian PSD matrix as ``L @ L.conj().T`` with diagonal pivoting.

    Pivoting stops once the largest remaining diagonal falls below
    ``rtol * trace``; the factor then has fewer columns than rows.

    :raises NotPositiveSemidefinite: if a residual diagonal drops below
        ``-rtol * trace``.
    """
    rtol = settings.CHOLESKY_RTOL if rtol is None else rtol
    covariance = np.asarray(covariance)
    diagonal = covariance.diagonal().real.copy()
    tol = rtol * max(float(np.sum(np.abs(diagonal))), np.finfo(float).tiny)
    _check_variances(diagonal, tol, "Negative variance on the diagonal:")
    columns = []
    for _ in range(diagonal.size):
        pivot = int(np.argmax(diagonal))
        if diagonal[pivot] <= tol:
            break
        column = _pivot_column(covariance, columns, pivot, diagonal[pivot])
        columns.append(column)
        diagonal -= np.abs(column) ** 2
        _check_variances(diagonal, tol, "Residual variance")
    if not columns:
        return np.zeros((diagonal.size, 0), dtype=covariance.dtype)
    return np.stack(columns, axis=1)


def cholesky_gp_samples(spec: ComplexGaussianSpec, rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` circular complex Gaussian vectors with covariance ``spec.covariance``.

    :returns: array of shape ``(count, m)``.
    """
    factor = pivoted_cholesky(spec.covariance)
    xi = rng.standard_normal((2, count, factor.shape[1]))
    return ((xi[0] + 1j * xi[1]) / math.sqrt(2)) @ factor.T


def cholesky_gp_sample(spec: ComplexGaussianSpec, rng: np.random.Generator) -> GPPath:
    return GPPath(spec.points, cholesky_gp_samples(spec, rng, 1)[0], PathOrigin.CHOLESKY_KERNEL)


def b0_increment_variance(t, s, eta: float):
    """``1/2 log((t - s)^2 / eta^2 + 1)``."""
    if not eta > 0:
        raise ConfigurationError(f"eta must be strictly positive, got {eta}")
    delta = np.asarray(t, dtype=float) - np.asarray(s, dtype=float)
    result = 0.5 * np.log1p((delta / eta) ** 2)
    return float(result) if result.ndim == 0 else result


def kernel_increment_variance(t, s, eta: float):
    """Increment variance of ``int_0^t Re Gamma'+_0(u + i eta) du``.

    Integrating the kernel twice gives ``1/2 log(1 + (t - s)^2 / (4 eta^2))``,
    i.e. :func:`b0_increment_variance` at ``2 eta``.
    """
    return b0_increment_variance(t, s, 2 * eta)


def _check_b0_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] != 0.0:
        raise ConfigurationError("The B0 grid must be a non-empty vector starting at 0")
    if np.any(np.diff(grid) <= 0):
        raise ConfigurationError("The B0 grid must be strictly increasing")
    return grid


def b0_covariance(grid, eta: float) -> np.ndarray:
    """``E B(t) B(s) = 1/2 [v(t) + v(s) - v(t - s)]`` with ``v = b0_increment_variance``."""
    grid = _check_b0_grid(grid)
    v = b0_increment_variance(grid, 0.0, eta)
    return 0.5 * (v[:, None] + v[None, :] - b0_increment_variance(grid[:, None], grid[None, :], eta))


def b0_samples(grid, eta: float, rng: np.random.Generator, count: int) -> np.ndarray:
    """``count`` paths of ``B0`` on ``grid``, pinned at ``B(0) = 0``.

    :returns: real array of shape ``(count, len(grid))``.
    """
    grid = _check_b0_grid(grid)
    out = np.zeros((count, grid.size))
    if grid.size > 1:
        factor = pivoted_cholesky(b0_covariance(grid, eta)[1:, 1:])
        out[:, 1:] = rng.standard_normal((count, factor.shape[1])) @ factor.T
    return out


def b0_sample(grid, eta: float, rng: np.random.Generator) -> np.ndarray:
    return b0_samples(grid, eta, rng, 1)[0]


def integrated_gamma_samples(
    taus, eta: float, rng: np.random.Generator, count: int, step: float = 0.02
) -> np.ndarray:
    """Paths ``tau -> int_0^tau Re Gamma'+_0(t + i eta) dt``.

    ``Gamma'+_0`` is drawn by pivoted Cholesky on a fine grid of spacing at
    most ``step`` containing ``taus``, and integrated by the trapezoid rule.

    :returns: real array of shape ``(count, len(taus))``.
    """
    taus = _check_b0_grid(taus)
    fine = np.unique(np.concatenate([np.linspace(0.0, taus[-1], int(math.ceil(taus[-1] / step)) + 1), taus]))
    spec = ComplexGaussianSpec.gamma([MesoPoint(float(t), eta) for t in fine], 0.0)
    values = cholesky_gp_samples(spec, rng, count).real
    integrals = scipy.integrate.cumulative_trapezoid(values, fine, axis=1, initial=0.0)
    return integrals[:, np.searchsorted(fine, taus)]


def integrated_gamma_sample(taus, eta: float, rng: np.random.Generator, step: float = 0.02) -> GPPath:
    """One integrated ``Gamma'+_0`` path as a :class:`GPPath` on the points ``tau + i eta``."""
    values = integrated_gamma_samples(taus, eta, rng, 1, step)[0]
    points = tuple(MesoPoint(float(t), eta) for t in taus)
    return GPPath(points, values, PathOrigin.INTEGRATED_GAMMA, {"H": 0.0, "eta": eta, "step": step})


def sine_process_covariance(z1: MesoPoint, z2: MesoPoint, density: float) -> complex:
    """Covariance of ``sum_j (x_j - z)^-1`` over a sine process of intensity ``density``.

    With ``s = (eta1 + eta2) - i (tau1 - tau2)`` this is
    ``(1 - exp(-2 pi density s)) / s^2``, which tends to the H = 0 kernel
    ``1 / s^2`` as the density grows.
    """
    if not density > 0:
        raise ConfigurationError(f"density must be positive, got {density}")
    s = complex(z1.eta + z2.eta, -(z1.tau - z2.tau))
    return (1 - np.exp(-2 * np.pi * density * s)) / (s * s)


def sinc_squared(t):
    """``(sin(pi t) / (pi t))^2``, equal to 1 at 0."""
    result = np.sinc(np.asarray(t, dtype=float)) ** 2
    return float(result) if result.ndim == 0 else result
