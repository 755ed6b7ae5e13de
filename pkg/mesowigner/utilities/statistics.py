"""Monte Carlo estimators with jackknife standard errors."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.stats

__all__ = [
    "jackknife",
    "sample_covariance",
    "sample_pseudo_covariance",
    "z_score",
    "mean_with_se",
    "product_moments",
    "MomentDiagnostics",
    "moment_diagnostics",
]


def _split_std(deviations: np.ndarray, scale: float) -> np.ndarray:
    """Root-mean-square over axis 0, separately for real and imaginary parts."""
    real = np.sqrt(scale * np.sum(deviations.real**2, axis=0))
    if np.iscomplexobj(deviations):
        return real + 1j * np.sqrt(scale * np.sum(deviations.imag**2, axis=0))
    return real


def jackknife(samples: np.ndarray, statistic: Callable[[np.ndarray], np.ndarray]):
    """Leave-one-out estimate of the standard error of ``statistic``.

    :param samples: Array whose first axis runs over Monte Carlo samples.
    :param statistic: Maps an array of samples to a (possibly complex) value
        or array of values.
    :returns: ``(estimate, standard_error)``. For complex statistics the
        standard error is ``se(real part) + 1j * se(imaginary part)``. With
        fewer than 3 samples the standard error is infinite.
    """
    samples = np.asarray(samples)
    m = samples.shape[0]
    estimate = np.asarray(statistic(samples))
    if m < 3:
        se = np.full(estimate.shape, np.inf)
        return estimate, (se + 1j * se if np.iscomplexobj(estimate) else se)
    keep = np.ones(m, dtype=bool)
    replicates = []
    for i in range(m):
        keep[i] = False
        replicates.append(statistic(samples[keep]))
        keep[i] = True
    replicates = np.asarray(replicates)
    deviations = replicates - replicates.mean(axis=0)
    return estimate, _split_std(deviations, (m - 1) / m)


def sample_covariance(samples: np.ndarray) -> np.ndarray:
    """Unbiased ``E(X_a conj(X_b))`` around the sample mean.

    :param samples: ``(M, m)`` complex array.
    :returns: ``(m, m)`` Hermitian matrix.
    """
    centered = samples - samples.mean(axis=0)
    return centered.T @ centered.conj() / (samples.shape[0] - 1)


def sample_pseudo_covariance(samples: np.ndarray) -> np.ndarray:
    """Unbiased ``E(X_a X_b)`` around the sample mean."""
    centered = samples - samples.mean(axis=0)
    return centered.T @ centered / (samples.shape[0] - 1)


def mean_with_se(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean over axis 0 of independent draws and its standard error ``std / sqrt(M)``.

    Complex values get ``se(Re) + 1j * se(Im)``.
    """
    values = np.asarray(values)
    m = values.shape[0]
    mean = values.mean(axis=0)
    if m < 2:
        se = np.full(mean.shape, np.inf)
        return mean, (se + 1j * se if np.iscomplexobj(values) else se)
    return mean, _split_std(values - mean, 1.0 / (m - 1)) / np.sqrt(m)


def product_moments(values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``E X_a conj(X_b)`` and ``E X_a X_b`` of centred iid draws, with standard errors.

    No centring is applied: the mean is known to be zero.

    :param values: ``(M, m)`` complex array.
    :returns: ``(covariance, covariance_se, pseudo, pseudo_se)``, each ``(m, m)``.
    """
    values = np.asarray(values, dtype=complex)
    m = values.shape[1]
    out = [np.empty((m, m), dtype=complex) for _ in range(4)]
    for a in range(m):
        out[0][a], out[1][a] = mean_with_se(values[:, [a]] * values.conj())
        out[2][a], out[3][a] = mean_with_se(values[:, [a]] * values)
    return tuple(out)


def _real_z(estimate: float, target: float, se: float) -> float:
    if not math.isfinite(se):
        return math.nan
    if se == 0:
        return 0.0 if estimate == target else math.copysign(math.inf, estimate - target)
    return (estimate - target) / se


def z_score(estimate, target, se):
    """``(estimate - target) / se``, part by part for complex values.

    An infinite standard error gives ``nan`` (no evidence either way).
    """
    if isinstance(estimate, complex) or isinstance(target, complex) or isinstance(se, complex):
        estimate, target, se = complex(estimate), complex(target), complex(se)
        return complex(_real_z(estimate.real, target.real, se.real), _real_z(estimate.imag, target.imag, se.imag))
    return _real_z(float(estimate), float(target), float(se))


@dataclass(frozen=True)
class MomentDiagnostics:
    skewness: float
    skewness_se: float
    excess_kurtosis: float
    kurtosis_se: float
    ks_statistic: float
    ks_pvalue: float
    zero_variance: bool = False

    def to_dict(self) -> dict:
        return {
            "skewness": self.skewness,
            "skewness_se": self.skewness_se,
            "excess_kurtosis": self.excess_kurtosis,
            "kurtosis_se": self.kurtosis_se,
            "ks_statistic": self.ks_statistic,
            "ks_pvalue": self.ks_pvalue,
            "zero_variance": self.zero_variance,
        }


def moment_diagnostics(values: np.ndarray) -> MomentDiagnostics:
    """Normality diagnostics of a real sample.

    The sample is standardized by its own mean and standard deviation; the
    null standard errors are ``sqrt(6/M)`` (skewness) and ``sqrt(24/M)``
    (excess kurtosis). Constant data is flagged instead of divided by zero.
    """
    values = np.asarray(values, dtype=float)
    m = values.size
    skew_se, kurt_se = math.sqrt(6 / m), math.sqrt(24 / m)
    std = float(values.std(ddof=1)) if m > 1 else 0.0
    if std == 0.0:
        return MomentDiagnostics(0.0, skew_se, 0.0, kurt_se, 1.0, 0.0, zero_variance=True)
    standardized = (values - values.mean()) / std
    ks = scipy.stats.kstest(standardized, "norm")
    return MomentDiagnostics(
        skewness=float(scipy.stats.skew(values)),
        skewness_se=skew_se,
        excess_kurtosis=float(scipy.stats.kurtosis(values, fisher=True)),
        kurtosis_se=kurt_se,
        ks_statistic=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
    )
