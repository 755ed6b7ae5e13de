"""Tests for grid Fourier analysis and the H^1/2 inner product."""

import itertools
import math

import numpy as np
import pytest
import scipy.integrate

from mesowigner.exceptions import ConfigurationError, DecayCheckError
from mesowigner.sobolev import (
    GridFunction,
    cauchy_pair_inner,
    cauchy_part_inner,
    fourier_transform,
    grid_from_function,
    h_half_inner,
    h_half_real_space,
    hilbert_transform,
    inverse_fourier_transform,
)
from mesowigner.spectral import MesoPoint
from mesowigner.testfunctions import TestFunction, corpus

GAUSSIAN = corpus.get("gaussian")
CLOSED_FORM = ["gaussian", "cauchy_re", "cauchy_im", "zero"]
SAMPLED = ["gaussian", "bump", "holder_bump", "narrow_bump", "zero"]


def cauchy_kernel(p: MesoPoint) -> TestFunction:
    """``x -> (x - tau - i eta)^-1`` with its transform ``i sqrt(2 pi) exp(-ikz)`` for ``k < 0``."""
    z = complex(p.tau, p.eta)

    def fourier(k):
        k = np.asarray(k, dtype=float)
        return np.where(k < 0, 1j * math.sqrt(2 * math.pi) * np.exp(-1j * np.minimum(k, 0.0) * z), 0j)

    return TestFunction(
        f"cauchy({p.tau:g}+{p.eta:g}i)",
        lambda x: 1 / (np.asarray(x, dtype=float) - z),
        lambda x: -1 / (np.asarray(x, dtype=float) - z) ** 2,
        fourier=fourier,
    )


def principal_value_hilbert(f: TestFunction, x: float, inner: float = 50.0) -> float:
    """``(1/pi) p.v. int f(t) / (x - t) dt`` by QUADPACK's Cauchy weight near ``x`` plus plain tails."""
    options = {"epsabs": 1e-13, "epsrel": 1e-12, "limit": 200}
    near, _ = scipy.integrate.quad(lambda t: float(f(t)), x - inner, x + inner, weight="cauchy", wvar=x, **options)
    tails = sum(
        scipy.integrate.quad(lambda t: float(f(t)) / (t - x), lower, upper, **options)[0]
        for lower, upper in ((-math.inf, x - inner), (x + inner, math.inf))
    )
    return -(near + tails) / math.pi


class TestGridFunction:
    def test_nodes(self):
        g = GridFunction(-1.0, 0.5, np.zeros(4))
        assert g.x.tolist() == [-1.0, -0.5, 0.0, 0.5]
        assert g.size == 4

    def test_sampling_is_centred(self):
        g = grid_from_function(GAUSSIAN.f, 4.0, 8)
        assert (g.x0, g.dx) == (-4.0, 1.0)
        assert g.values[4] == 1.0

    def test_norm(self):
        assert GridFunction(0.0, 0.25, np.array([2.0, 0.0, 2.0])).norm() == pytest.approx(math.sqrt(2))

    @pytest.mark.parametrize("dx, values, message", [(0.0, [1.0], "spacing"), (1.0, [], "non-empty")])
    def test_invalid(self, dx, values, message):
        with pytest.raises(ConfigurationError, match=message):
            GridFunction(0.0, dx, np.array(values))

    def test_same_grid(self):
        g = grid_from_function(GAUSSIAN.f, 4.0, 8)
        assert g.same_grid(grid_from_function(np.sin, 4.0, 8))
        assert not g.same_grid(grid_from_function(GAUSSIAN.f, 4.0, 16))


class TestFourierTransform:
    def test_gaussian_is_its_own_transform(self):
        transform = fourier_transform(grid_from_function(GAUSSIAN.f, 32.0, 2**12))
        np.testing.assert_allclose(transform.values, np.exp(-transform.x**2 / 2), atol=1e-12)

    def test_shifted_gaussian_picks_up_a_phase(self):
        transform = fourier_transform(grid_from_function(lambda x: GAUSSIAN.f(x - 1.5), 32.0, 2**12))
        expected = np.exp(-transform.x**2 / 2 - 1.5j * transform.x)
        np.testing.assert_allclose(transform.values, expected, atol=1e-12)

    def test_conjugate_grid(self):
        transform = fourier_transform(grid_from_function(GAUSSIAN.f, 32.0, 2**12))
        assert transform.dx == pytest.approx(2 * math.pi / 64)
        assert transform.x[2**11] == 0.0

    def test_inverse_recovers_the_samples(self):
        g = grid_from_function(lambda x: x * GAUSSIAN.f(x), 16.0, 2**10)
        back = inverse_fourier_transform(fourier_transform(g))
        assert back.x0 == pytest.approx(g.x0)
        assert back.dx == pytest.approx(g.dx)
        np.testing.assert_allclose(back.values, g.values, atol=1e-12)

    @pytest.mark.parametrize("name", ["gaussian", "bump", "holder_bump"])
    def test_plancherel(self, name):
        g = grid_from_function(corpus.get(name).f, 32.0, 2**12)
        assert fourier_transform(g).norm() == pytest.approx(g.norm(), rel=1e-12)

    def test_gaussian_norm(self):
        assert grid_from_function(GAUSSIAN.f, 32.0, 2**12).norm() ** 2 == pytest.approx(math.sqrt(math.pi), rel=1e-12)

    def test_power_of_two_length(self):
        with pytest.raises(ConfigurationError, match="power-of-two"):
            fourier_transform(grid_from_function(GAUSSIAN.f, 32.0, 1000))

    def test_decay_check(self):
        with pytest.raises(DecayCheckError, match="widen the grid"):
            fourier_transform(grid_from_function(GAUSSIAN.f, 2.0, 64))

    def test_decay_tolerance_can_be_relaxed(self):
        fourier_transform(grid_from_function(GAUSSIAN.f, 2.0, 64), decay_tol=0.5)

    def test_zero_function_passes_the_decay_check(self):
        assert not fourier_transform(grid_from_function(np.zeros_like, 1.0, 8)).values.any()


class TestHilbertTransform:
    @pytest.fixture(scope="class")
    def cauchy_transform(self):
        return hilbert_transform(grid_from_function(corpus.get("cauchy_im").f, 2.0**15, 2**19))

    def test_cauchy_pair(self, cauchy_transform):
        inside = np.abs(cauchy_transform.x) <= 10
        assert np.isrealobj(cauchy_transform.values)
        expected = corpus.get("cauchy_re")(cauchy_transform.x[inside])
        np.testing.assert_allclose(cauchy_transform.values[inside], expected, atol=1e-6)

    @pytest.mark.parametrize("x", [-3.0, -1.0, 0.5, 2.0, 7.0])
    def test_principal_value_quadrature(self, cauchy_transform, x):
        quadrature = principal_value_hilbert(corpus.get("cauchy_im"), x)
        assert quadrature == pytest.approx(x / (1 + x * x), abs=1e-8)
        assert np.interp(x, cauchy_transform.x, cauchy_transform.values) == pytest.approx(quadrature, abs=1e-6)

    def test_applied_twice_is_minus_identity(self):
        g = grid_from_function(lambda x: x * GAUSSIAN.f(x), 32.0, 2**12)
        # the first transform decays like x^-2, below the default tolerance
        twice = hilbert_transform(hilbert_transform(g), decay_tol=1.0)
        np.testing.assert_allclose(twice.values, -g.values, atol=1e-10)

    def test_complex_input_stays_complex(self):
        g = grid_from_function(lambda x: (1 + 1j) * GAUSSIAN.f(x), 32.0, 2**8)
        assert np.iscomplexobj(hilbert_transform(g).values)


class TestHHalfInner:
    def test_gaussian_closed_form(self):
        assert h_half_inner(GAUSSIAN, GAUSSIAN) == pytest.approx(1 / (2 * math.pi), rel=1e-9)

    def test_gaussian_fft(self):
        value = h_half_inner(GAUSSIAN, GAUSSIAN, method="fft", half_width=512.0, points=2**16)
        assert value == pytest.approx(1 / (2 * math.pi), rel=1e-4)

    @pytest.mark.parametrize("name", ["cauchy_re", "cauchy_im"])
    def test_cauchy_parts(self, name):
        f = corpus.get(name)
        assert h_half_inner(f, f) == pytest.approx(1 / 8, rel=1e-9)

    def test_cauchy_parts_are_orthogonal(self):
        assert abs(h_half_inner(corpus.get("cauchy_re"), corpus.get("cauchy_im"))) < 1e-12

    def test_grid_functions(self):
        g = grid_from_function(GAUSSIAN.f, 512.0, 2**16)
        assert h_half_inner(g, g) == pytest.approx(1 / (2 * math.pi), rel=1e-4)

    def test_bump_fft_matches_real_space(self):
        bump = corpus.get("bump")
        value = h_half_inner(bump, bump, half_width=256.0, points=2**18)
        assert value.real == pytest.approx(h_half_real_space(bump), rel=2e-4)
        assert abs(value.imag) < 1e-12

    @pytest.mark.parametrize("a", [0.5, 2.0])
    def test_scale_invariance(self, a):
        bump = corpus.get("bump")
        grid = {"half_width": 64.0, "points": 2**14}
        rescaled = h_half_inner(bump.rescaled(a), bump.rescaled(a), **grid)
        assert rescaled.real == pytest.approx(h_half_inner(bump, bump, **grid).real, rel=1e-3)

    @pytest.mark.parametrize("a", [0.5, 2.0])
    def test_scale_invariance_of_the_closed_form(self, a):
        rescaled = GAUSSIAN.rescaled(a)
        assert h_half_inner(rescaled, rescaled).real == pytest.approx(1 / (2 * math.pi), rel=1e-6)

    @pytest.mark.parametrize("f, g", itertools.combinations_with_replacement(CLOSED_FORM, 2))
    def test_closed_form_is_hermitian_and_positive(self, f, g):
        forward = h_half_inner(corpus.get(f), corpus.get(g))
        assert forward == pytest.approx(np.conj(h_half_inner(corpus.get(g), corpus.get(f))), abs=1e-14)
        assert h_half_inner(corpus.get(f), corpus.get(f)).real >= 0

    @pytest.mark.parametrize("f, g", itertools.combinations_with_replacement(SAMPLED, 2))
    def test_fft_route_is_hermitian_and_positive(self, f, g):
        grid = {"method": "fft", "half_width": 64.0, "points": 2**14}
        forward = h_half_inner(corpus.get(f), corpus.get(g), **grid)
        assert forward == pytest.approx(np.conj(h_half_inner(corpus.get(g), corpus.get(f), **grid)), abs=1e-14)
        own = h_half_inner(corpus.get(f), corpus.get(f), **grid)
        assert own.real >= 0
        assert abs(own.imag) <= 1e-14

    def test_unknown_method(self):
        with pytest.raises(ConfigurationError, match="Unknown method"):
            h_half_inner(GAUSSIAN, GAUSSIAN, method="monte_carlo")

    def test_closed_form_needs_transforms(self):
        with pytest.raises(ConfigurationError, match="Closed-form"):
            h_half_inner(corpus.get("bump"), GAUSSIAN, method="closed_form")

    def test_grids_must_agree(self):
        with pytest.raises(ConfigurationError, match="same grid"):
            h_half_inner(grid_from_function(GAUSSIAN.f, 32.0, 2**10), grid_from_function(GAUSSIAN.f, 32.0, 2**11))

    def test_slow_decay_is_refused(self):
        with pytest.raises(DecayCheckError):
            h_half_inner(corpus.get("cauchy_re"), corpus.get("cauchy_re"), method="fft", half_width=64.0, points=2**12)


class TestCauchyKernels:
    def test_pair_inner(self):
        assert cauchy_pair_inner(MesoPoint(0.0, 1.0), MesoPoint(0.0, 1.0)) == 0.25
        assert cauchy_pair_inner(MesoPoint(1.0, 0.5), MesoPoint(0.0, 0.5)) == pytest.approx(1 / (1 - 1j) ** 2)

    @pytest.mark.parametrize(
        "p1, p2",
        [
            (MesoPoint(0.0, 1.0), MesoPoint(0.0, 1.0)),
            (MesoPoint(1.0, 0.5), MesoPoint(0.0, 0.5)),
            (MesoPoint(-0.3, 2.0), MesoPoint(0.7, 0.25)),
        ],
    )
    def test_pair_inner_matches_the_transforms(self, p1, p2):
        assert h_half_inner(cauchy_kernel(p1), cauchy_kernel(p2)) == pytest.approx(cauchy_pair_inner(p1, p2), rel=1e-8)

    @pytest.mark.parametrize(
        "part1, part2, name1, name2",
        [
            ("re", "re", "cauchy_re", "cauchy_re"),
            ("im", "im", "cauchy_im", "cauchy_im"),
            ("re", "im", "cauchy_re", "cauchy_im"),
        ],
    )
    def test_parts_match_the_closed_form_transforms(self, part1, part2, name1, name2):
        point = MesoPoint(0.0, 1.0)
        expected = h_half_inner(corpus.get(name1), corpus.get(name2)).real
        assert cauchy_part_inner(part1, point, part2, point) == pytest.approx(expected, abs=1e-12)

    def test_antisymmetric_cross_terms(self):
        p1, p2 = MesoPoint(0.3, 1.0), MesoPoint(-0.2, 0.5)
        assert cauchy_part_inner("re", p1, "im", p2) == pytest.approx(-cauchy_part_inner("im", p1, "re", p2))

    def test_unknown_part(self):
        with pytest.raises(ConfigurationError, match="Parts"):
            cauchy_part_inner("abs", MesoPoint(0, 1), "re", MesoPoint(0, 1))


class TestRealSpace:
    def test_needs_compact_support(self):
        with pytest.raises(ConfigurationError, match="compact support"):
            h_half_real_space(GAUSSIAN)

    def test_zero_function(self):
        assert h_half_real_space(corpus.get("zero")) == 0.0

    def test_scale_invariance(self):
        bump = corpus.get("bump")
        assert h_half_real_space(bump.rescaled(3.0)) == pytest.approx(h_half_real_space(bump), rel=1e-6)
