"""Tests for the Gaussian limit processes and their samplers."""

import math

import numpy as np
import pytest

from mesowigner.constants import PathOrigin
from mesowigner.exceptions import ConfigurationError, NotPositiveSemidefinite, TruncationError
from mesowigner.processes import (
    ComplexGaussianSpec,
    GPPath,
    HurstParam,
    b0_covariance,
    b0_increment_variance,
    b0_samples,
    binomial_series,
    cayley_series_sample,
    cayley_series_samples,
    check_truncation,
    cholesky_gp_samples,
    default_normalization,
    gamma_covariance,
    gamma_covariance_matrix,
    integrated_gamma_sample,
    integrated_gamma_samples,
    kernel_increment_variance,
    pivoted_cholesky,
    series_coefficients,
    series_covariance,
    series_truncation_order,
    sinc_squared,
    sine_process_covariance,
    truncation_error,
)
from mesowigner.spectral import MesoPoint
from mesowigner.utilities.statistics import mean_with_se, product_moments

POINTS = [MesoPoint(0.0, 1.0), MesoPoint(0.5, 1.0), MesoPoint(1.0, 2.0), MesoPoint(-0.5, 0.5)]


def assert_within_se(estimate, target, se, k=5.0):
    """Every real and imaginary part of ``estimate`` lies within ``k`` standard errors."""
    estimate, target, se = np.asarray(estimate), np.asarray(target), np.asarray(se)
    assert np.all(np.abs(estimate.real - target.real) <= k * se.real + 1e-12)
    assert np.all(np.abs(estimate.imag - target.imag) <= k * se.imag + 1e-12)


class TestHurstParam:
    @pytest.mark.parametrize("h", [1.0, 1.5])
    def test_must_be_below_one(self, h):
        with pytest.raises(ConfigurationError, match="< 1"):
            HurstParam(h)

    @pytest.mark.parametrize("h, p", [(0.0, 2.0), (0.5, 1.0), (-0.5, 3.0)])
    def test_exponent(self, h, p):
        assert HurstParam(h).exponent == p

    def test_coerce(self):
        param = HurstParam(0.25)
        assert HurstParam.coerce(param) is param
        assert HurstParam.coerce(0.25) == param


class TestGammaCovariance:
    def test_zero_hurst_is_the_reciprocal_square(self):
        z1, z2 = MesoPoint(0.3, 1.0), MesoPoint(-0.2, 0.5)
        expected = 1 / (1j * (complex(0.3, 1.0) - complex(-0.2, -0.5))) ** 2
        assert gamma_covariance(z1, z2) == pytest.approx(expected, rel=1e-14)

    def test_variance_at_a_point(self):
        assert gamma_covariance(MesoPoint(4.0, 0.5), MesoPoint(4.0, 0.5), 0.25) == pytest.approx(1.0)

    @pytest.mark.parametrize("h", [0.0, 0.3, -0.4])
    def test_hermitian(self, h):
        z1, z2 = MesoPoint(0.3, 1.0), MesoPoint(-0.2, 0.5)
        assert gamma_covariance(z2, z1, h) == pytest.approx(np.conj(gamma_covariance(z1, z2, h)))

    @pytest.mark.parametrize("h", [0.0, 0.25, 0.5])
    def test_matrix_is_positive_semidefinite(self, h):
        matrix = gamma_covariance_matrix(POINTS, h)
        assert np.linalg.eigvalsh(matrix).min() > -1e-12
        assert matrix[1, 3] == pytest.approx(gamma_covariance(POINTS[1], POINTS[3], h))

    def test_points_must_be_given(self):
        with pytest.raises(ConfigurationError, match="At least one point"):
            gamma_covariance_matrix([])


class TestCayleySeries:
    def test_default_normalization(self):
        assert default_normalization(0.0) == 0.5
        assert default_normalization(0.5) == pytest.approx(2**-0.5)

    def test_coefficients_for_zero_hurst(self):
        np.testing.assert_allclose(series_coefficients(4, 0.0), np.sqrt([1.0, 2.0, 3.0, 4.0]))

    @pytest.mark.parametrize("x", [0.1, 0.5, 0.9 * np.exp(0.7j), 0.9 * np.exp(2.5j)])
    @pytest.mark.parametrize("h", [0.0, 0.25, 0.5])
    def test_binomial_series(self, x, h):
        expected = (1 - x) ** -(2 - 2 * h)
        assert abs(binomial_series(x, h, 2000) - expected) <= 1e-10 * abs(expected)

    @pytest.mark.parametrize("h", [0.0, 0.25, 0.5])
    def test_series_covariance_matches_the_kernel(self, h):
        for z1 in POINTS:
            for z2 in POINTS:
                exact = gamma_covariance(z1, z2, h)
                assert abs(series_covariance(z1, z2, h, 2000) - exact) <= 1e-6 * abs(exact)

    def test_truncation_order_at_the_cayley_centre(self):
        assert series_truncation_order([MesoPoint(0.0, 1.0)], 0.0) == 1

    def test_truncation_order_grows_near_the_axis(self):
        far = series_truncation_order([MesoPoint(0.0, 0.5)], 0.0)
        near = series_truncation_order([MesoPoint(0.0, 0.1)], 0.0)
        assert 1 < far < near

    def test_truncation_error(self):
        with pytest.raises(TruncationError, match="5 terms"):
            series_truncation_order([MesoPoint(0.0, 0.05)], 0.0, max_terms=5)

    def test_explicit_order_near_the_boundary(self, rng):
        with pytest.raises(TruncationError, match="500 terms"):
            cayley_series_sample([MesoPoint(0.0, 1e-7)], 0.0, rng, terms=500)

    def test_explicit_order_too_small(self, rng):
        with pytest.raises(TruncationError, match="above"):
            cayley_series_samples([MesoPoint(0.0, 0.1)], 0.25, rng, 3, terms=10)

    def test_explicit_order_is_certified(self):
        terms = series_truncation_order(POINTS, 0.25)
        assert truncation_error(POINTS, 0.25, terms) <= 1e-4
        assert check_truncation(POINTS, 0.25, terms) == truncation_error(POINTS, 0.25, terms)
        assert truncation_error([MesoPoint(0.0, 1.0)], 0.25, 1) == 0.0

    def test_at_least_one_term(self, rng):
        with pytest.raises(ConfigurationError, match="series term"):
            cayley_series_samples(POINTS, 0.0, rng, 3, terms=0)

    def test_shape(self, rng):
        assert cayley_series_samples(POINTS, 0.0, rng, 7).shape == (7, len(POINTS))

    @pytest.mark.parametrize("h", [0.0, 0.25])
    def test_monte_carlo_moments(self, h):
        rng = np.random.default_rng(3)
        values = cayley_series_samples(POINTS[:3], h, rng, 40_000)
        covariance, covariance_se, pseudo, pseudo_se = product_moments(values)
        assert_within_se(covariance, gamma_covariance_matrix(POINTS[:3], h), covariance_se)
        assert_within_se(pseudo, np.zeros_like(pseudo), pseudo_se)

    def test_sample_metadata(self, rng):
        path = cayley_series_sample(POINTS, 0.0, rng, terms=50)
        assert path.origin is PathOrigin.CAYLEY_SERIES
        assert path.metadata == {"H": 0.0, "K": 50, "normalization": 0.5}
        assert path.values.shape == (len(POINTS),)


class TestPivotedCholesky:
    def test_reconstructs_a_low_rank_matrix(self, rng):
        b = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
        matrix = b @ b.conj().T
        factor = pivoted_cholesky(matrix)
        assert factor.shape == (5, 3)
        np.testing.assert_allclose(factor @ factor.conj().T, matrix, atol=1e-10)

    def test_rank_one(self):
        v = np.array([1.0, 2.0, -1.0])
        assert pivoted_cholesky(np.outer(v, v)).shape == (3, 1)

    def test_zero_matrix(self):
        assert pivoted_cholesky(np.zeros((2, 2))).shape == (2, 0)

    def test_indefinite_matrix(self):
        with pytest.raises(NotPositiveSemidefinite):
            pivoted_cholesky(np.diag([1.0, -1.0]))

    def test_indefinite_off_diagonal(self):
        with pytest.raises(NotPositiveSemidefinite, match="Residual"):
            pivoted_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_monte_carlo_moments(self):
        rng = np.random.default_rng(4)
        spec = ComplexGaussianSpec.gamma(POINTS, 0.5)
        covariance, covariance_se, pseudo, pseudo_se = product_moments(cholesky_gp_samples(spec, rng, 40_000))
        assert_within_se(covariance, spec.covariance, covariance_se)
        assert_within_se(pseudo, np.zeros_like(pseudo), pseudo_se)


class TestComplexGaussianSpec:
    def test_pseudo_defaults_to_zero(self):
        spec = ComplexGaussianSpec.gamma(POINTS[:2])
        assert spec.pseudo.shape == (2, 2)
        assert not spec.pseudo.any()

    @pytest.mark.parametrize(
        "points, covariance, pseudo, message",
        [
            ((), np.zeros((0, 0)), None, "at least one point"),
            ((MesoPoint(0, 1),), np.eye(2), None, "1x1"),
            ((MesoPoint(0, 1), MesoPoint(1, 1)), np.array([[1, 1j], [1j, 1]]), None, "Hermitian"),
            ((MesoPoint(0, 1),), np.eye(1), np.eye(1), "circular"),
        ],
    )
    def test_invalid(self, points, covariance, pseudo, message):
        with pytest.raises(ConfigurationError, match=message):
            ComplexGaussianSpec(points, covariance, pseudo)


class TestGPPath:
    def test_values_must_match_points(self):
        with pytest.raises(ConfigurationError, match="2 values for 1 points"):
            GPPath((MesoPoint(0.0, 1.0),), np.zeros(2), PathOrigin.CHOLESKY_KERNEL)


class TestB0:
    def test_increment_variance(self):
        assert b0_increment_variance(1.0, 0.0, 1.0) == pytest.approx(0.5 * math.log(2))
        np.testing.assert_allclose(b0_increment_variance(np.array([-1.0, 3.0]), 1.0, 2.0), 0.5 * math.log(2))

    def test_kernel_increment_variance_doubles_eta(self):
        assert kernel_increment_variance(2.0, 0.0, 1.0) == pytest.approx(0.5 * math.log(2))

    def test_eta_must_be_positive(self):
        with pytest.raises(ConfigurationError, match="eta"):
            b0_increment_variance(1.0, 0.0, 0.0)

    def test_covariance(self):
        grid = [0.0, 0.5, 1.0]
        covariance = b0_covariance(grid, 0.5)
        assert not covariance[0].any()
        np.testing.assert_allclose(np.diag(covariance), b0_increment_variance(np.array(grid), 0.0, 0.5))

    @pytest.mark.parametrize(
        "grid, message", [([0.5, 1.0], "starting at 0"), ([0.0, 1.0, 1.0], "strictly increasing"), ([], "non-empty")]
    )
    def test_grid(self, grid, message):
        with pytest.raises(ConfigurationError, match=message):
            b0_covariance(grid, 1.0)

    def test_paths_are_pinned(self, rng):
        paths = b0_samples([0.0, 1.0], 0.5, rng, 10)
        assert paths.shape == (10, 2)
        assert not paths[:, 0].any()

    def test_single_point_grid(self, rng):
        assert not b0_samples([0.0], 0.5, rng, 3).any()

    def test_monte_carlo_increments(self):
        rng = np.random.default_rng(5)
        grid = [0.0, 0.5, 1.0, 2.0]
        paths = b0_samples(grid, 0.5, rng, 40_000)
        for i in range(len(grid)):
            for j in range(i + 1, len(grid)):
                mean, se = mean_with_se((paths[:, j] - paths[:, i]) ** 2)
                assert abs(mean - b0_increment_variance(grid[j], grid[i], 0.5)) <= 5 * se


class TestIntegratedGamma:
    def test_monte_carlo_increments(self):
        rng = np.random.default_rng(6)
        taus = [0.0, 0.5, 1.0]
        paths = integrated_gamma_samples(taus, 0.5, rng, 20_000)
        assert paths.shape == (20_000, 3)
        assert not paths[:, 0].any()
        for i in range(len(taus)):
            for j in range(i + 1, len(taus)):
                mean, se = mean_with_se((paths[:, j] - paths[:, i]) ** 2)
                assert abs(mean - kernel_increment_variance(taus[j], taus[i], 0.5)) <= 5 * se

    def test_sample(self, rng):
        path = integrated_gamma_sample([0.0, 1.0], 0.5, rng)
        assert path.origin is PathOrigin.INTEGRATED_GAMMA
        assert path.points == (MesoPoint(0.0, 0.5), MesoPoint(1.0, 0.5))
        assert path.metadata["eta"] == 0.5


class TestSineProcess:
    def test_tends_to_the_gamma_kernel(self):
        z1, z2 = MesoPoint(0.2, 0.5), MesoPoint(-0.4, 1.0)
        assert sine_process_covariance(z1, z2, 1e3) == pytest.approx(gamma_covariance(z1, z2), rel=1e-12)

    def test_variance_at_finite_density(self):
        z = MesoPoint(0.0, 0.5)
        assert sine_process_covariance(z, z, 0.5) == pytest.approx(1 - math.exp(-math.pi))

    def test_density_must_be_positive(self):
        with pytest.raises(ConfigurationError, match="density"):
            sine_process_covariance(MesoPoint(0, 1), MesoPoint(0, 1), 0.0)

    def test_sinc_squared(self):
        assert sinc_squared(0.0) == 1.0
        assert sinc_squared(0.5) == pytest.approx(4 / math.pi**2)
        np.testing.assert_allclose(sinc_squared(np.array([1.0, 2.0])), 0.0, atol=1e-30)
