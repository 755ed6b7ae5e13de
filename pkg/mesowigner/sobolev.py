"""Fourier analysis on uniform grids and the H^1/2 inner product.

The Fourier convention throughout is ``f^(k) = (2 pi)^-1/2 int f(x) exp(-ikx) dx``.
The H^1/2 form is ``(1/2pi) int |k| f^(k) conj(g^(k)) dk``, the limiting
covariance of mesoscopic linear statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, partial

import numpy as np
import scipy.fft
import scipy.integrate

from .conf import settings
from .exceptions import ConfigurationError, DecayCheckError
from .spectral import MesoPoint
from .testfunctions import TestFunction

__all__ = [
    "GridFunction",
    "grid_from_function",
    "fourier_transform",
    "inverse_fourier_transform",
    "hilbert_transform",
    "h_half_inner",
    "cauchy_pair_inner",
    "cauchy_part_inner",
    "h_half_real_space",
]

_SQRT_2PI = math.sqrt(2 * math.pi)


@dataclass(frozen=True)
class GridFunction:
    """Samples ``values[j] = g(x0 + j dx)``."""

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self):
        if not self.dx > 0:
            raise ConfigurationError(f"Grid spacing must be positive, got {self.dx}")
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size == 0:
            raise ConfigurationError("A grid function needs a non-empty vector of values")
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return self.values.size

    @cached_property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.size)

    def same_grid(self, other: GridFunction) -> bool:
        return self.size == other.size and self.x0 == other.x0 and self.dx == other.dx

    def norm(self) -> float:
        """Discrete L^2 norm ``sqrt(dx sum |g|^2)``."""
        return math.sqrt(self.dx * float(np.sum(np.abs(self.values) ** 2)))


def grid_from_function(f, half_width: float | None = None, points: int | None = None) -> GridFunction:
    """Sample ``f`` on ``[-half_width, half_width)`` at ``points`` equispaced nodes."""
    half_width = settings.GRID_HALF_WIDTH if half_width is None else half_width
    points = settings.GRID_POINTS if points is None else points
    dx = 2 * half_width / points
    x = -half_width + dx * np.arange(points)
    return GridFunction(-half_width, dx, np.asarray(f(x)))


def _check_fft_grid(g: GridFunction, decay_tol: float | None) -> None:
    n = g.size
    if n & (n - 1):
        raise ConfigurationError(f"FFT grids must have a power-of-two length, got {n}")
    decay_tol = settings.DECAY_TOL if decay_tol is None else decay_tol
    peak = float(np.max(np.abs(g.values)))
    edge = max(abs(g.values[0]), abs(g.values[-1]))
    if peak > 0 and edge > decay_tol * peak:
        raise DecayCheckError(
            f"Grid function is {edge / peak:.2e} of its maximum at the grid ends (tolerance {decay_tol:g}); "
            "widen the grid"
        )


def fourier_transform(g: GridFunction, decay_tol: float | None = None) -> GridFunction:
    """Approximate the continuum transform of ``g`` on the conjugate grid.

    The result lives on ``k_m = (m - N/2) dk`` with ``dk = 2 pi / (N dx)``.

    :raises DecayCheckError: if ``g`` does not decay at the grid ends.
    """
    _check_fft_grid(g, decay_tol)
    n = g.size
    dk = 2 * math.pi / (n * g.dx)
    k = (np.arange(n) - n // 2) * dk
    spectrum = scipy.fft.fftshift(scipy.fft.fft(g.values))
    return GridFunction(float(k[0]), dk, g.dx / _SQRT_2PI * np.exp(-1j * k * g.x0) * spectrum)


def inverse_fourier_transform(g: GridFunction, x0: float | None = None) -> GridFunction:
    """Inverse of :func:`fourier_transform`.

    :param x0: Left end of the output grid; defaults to the centred grid
        ``-N dx / 2`` with ``dx = 2 pi / (N dk)``.
    """
    n = g.size
    dx = 2 * math.pi / (n * g.dx)
    if x0 is None:
        x0 = -(n // 2) * dx
    m = np.arange(n)
    total = n * scipy.fft.ifft(g.values * np.exp(1j * m * g.dx * x0))
    values = g.dx / _SQRT_2PI * np.exp(1j * g.x0 * (x0 + m * dx)) * total
    return GridFunction(x0, dx, values)


def hilbert_transform(g: GridFunction, decay_tol: float | None = None) -> GridFunction:
    """Apply the Fourier multiplier ``-i sgn(k)`` (``sgn(0) = 0``).

    For decaying ``g`` this approximates ``(1/pi) p.v. int g(t) / (x - t) dt``.
    The Nyquist mode has no sign and is dropped.
    """
    _check_fft_grid(g, decay_tol)
    n = g.size
    k = scipy.fft.fftfreq(n, g.dx)
    multiplier = -1j * np.sign(k)
    multiplier[n // 2] = 0.0
    values = scipy.fft.ifft(multiplier * scipy.fft.fft(g.values))
    if np.isrealobj(g.values):
        values = values.real
    return GridFunction(g.x0, g.dx, values)


def _closed_form_inner(f: TestFunction, g: TestFunction) -> complex:
    def integrand(k: float) -> complex:
        k = np.array([k])
        return abs(k[0]) * complex(np.asarray(f.fourier(k))[0] * np.conj(np.asarray(g.fourier(k))[0]))

    options = {"epsabs": 1e-12, "epsrel": 1e-10, "limit": 200}
    total = 0j
    for lower, upper in ((-math.inf, 0.0), (0.0, math.inf)):
        real, _ = scipy.integrate.quad(lambda k: integrand(k).real, lower, upper, **options)
        imag, _ = scipy.integrate.quad(lambda k: integrand(k).imag, lower, upper, **options)
        total += complex(real, imag)
    return total / (2 * math.pi)


def _grid_inner(f: GridFunction, g: GridFunction, decay_tol: float | None) -> complex:
    if not f.same_grid(g):
        raise ConfigurationError("Both grid functions must share the same grid")
    fhat = fourier_transform(f, decay_tol)
    ghat = fourier_transform(g, decay_tol)
    k = fhat.x
    return complex(np.sum(np.abs(k) * fhat.values * np.conj(ghat.values)) * fhat.dx / (2 * math.pi))


def h_half_inner(
    f: TestFunction | GridFunction,
    g: TestFunction | GridFunction,
    *,
    method: str = "auto",
    half_width: float | None = None,
    points: int | None = None,
    decay_tol: float | None = None,
) -> complex:
    """``(1/2pi) int |k| f^(k) conj(g^(k)) dk``.

    :param method: ``"closed_form"`` integrates the known transforms of two
        test functions adaptively; ``"fft"`` samples both on a grid and sums
        the trapezoid rule on the FFT grid; ``"auto"`` prefers the closed form.
    :raises DecayCheckError: if a sampled function does not decay on the grid.
    """
    if method not in ("auto", "closed_form", "fft"):
        raise ConfigurationError(f"Unknown method {method!r}")
    both_closed = all(isinstance(h, TestFunction) and h.fourier is not None for h in (f, g))
    if method == "closed_form" and not both_closed:
        raise ConfigurationError("Closed-form route needs two test functions with known transforms")
    if both_closed and method != "fft":
        return _closed_form_inner(f, g)
    return _grid_inner(_as_grid(f, half_width, points), _as_grid(g, half_width, points), decay_tol)


def _as_grid(h: TestFunction | GridFunction, half_width: float | None, points: int | None) -> GridFunction:
    return grid_from_function(h.f, half_width, points) if isinstance(h, TestFunction) else h


def cauchy_pair_inner(p1: MesoPoint, p2: MesoPoint) -> complex:
    """H^1/2 product of the kernels ``x -> (x - tau_a - i eta_a)^-1``.

    Equals ``1 / ((eta1 + eta2) - i (tau1 - tau2))^2``.
    """
    s = complex(p1.eta + p2.eta, -(p1.tau - p2.tau))
    return 1 / (s * s)


def cauchy_part_inner(part1: str, p1: MesoPoint, part2: str, p2: MesoPoint) -> float:
    """H^1/2 product of real or imaginary parts of two Cauchy kernels.

    With ``C = cauchy_pair_inner(p1, p2)``: Re/Re and Im/Im give ``Re C / 2``,
    Re/Im gives ``-Im C / 2`` and Im/Re gives ``Im C / 2``.

    :param part1: ``"re"`` or ``"im"``.
    """
    c = cauchy_pair_inner(p1, p2)
    table = {
        ("re", "re"): c.real / 2,
        ("im", "im"): c.real / 2,
        ("re", "im"): -c.imag / 2,
        ("im", "re"): c.imag / 2,
    }
    try:
        return table[(part1, part2)]
    except KeyError:
        raise ConfigurationError(f"Parts must be 're' or 'im', got {part1!r}, {part2!r}") from None


def _difference_quotient(f: TestFunction, y: float, x: float) -> float:
    if abs(x - y) < 1e-12:
        return float(f.df(np.array([x]))[0]) ** 2
    fx, fy = f.f(np.array([x, y]))
    return ((fx - fy) / (x - y)) ** 2


def _outside_weight(f: TestFunction, a: float, b: float, x: float) -> float:
    if x <= a or x >= b:
        return 0.0
    return float(f.f(np.array([x]))[0]) ** 2 * (1 / (b - x) + 1 / (x - a))


def h_half_real_space(f: TestFunction, epsabs: float = 1e-11, epsrel: float = 1e-9) -> float:
    """The H^1/2 seminorm squared of a compactly supported real ``f`` in real space.

    ``(1/4pi^2) int int ((f(x) - f(y)) / (x - y))^2 dx dy``, split into the
    square ``[a, b]^2`` and the tail ``2 int_a^b f^2 (1/(b - x) + 1/(x - a)) dx``
    where ``[a, b]`` is the support.
    """
    if f.support is None:
        raise ConfigurationError(f"{f.name} has no compact support")
    a, b = f.support
    square, _ = scipy.integrate.dblquad(partial(_difference_quotient, f), a, b, a, b, epsabs=epsabs, epsrel=epsrel)
    outside, _ = scipy.integrate.quad(partial(_outside_weight, f, a, b), a, b, epsabs=epsabs, epsrel=epsrel, limit=200)
    return (square + 2 * outside) / (4 * math.pi**2)
