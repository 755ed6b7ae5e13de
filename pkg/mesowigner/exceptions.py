"""Exception hierarchy shared by all mesowigner modules."""

from __future__ import annotations

__all__ = [
    "MesoError",
    "ConfigurationError",
    "EigensolveError",
    "DecayCheckError",
    "TruncationError",
    "NotPositiveSemidefinite",
    "QuadratureError",
    "SampleFailure",
]


class MesoError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(MesoError, ValueError):
    """An argument or configuration value is outside its admissible domain."""


class EigensolveError(MesoError):
    """The eigensolver did not converge or failed its residual certificate."""

    def __init__(self, message: str, *, seed: int | None = None, sample_index: int | None = None):
        self.seed = seed
        self.sample_index = sample_index
        super().__init__(message)


class DecayCheckError(MesoError):
    """A grid function does not decay at the grid ends; an FFT would be biased."""


class TruncationError(MesoError):
    """A truncated Cayley series cannot reach the requested accuracy."""


class NotPositiveSemidefinite(MesoError):
    """A covariance matrix has a negative pivot beyond tolerance."""


class QuadratureError(MesoError):
    """An adaptive quadrature did not reach its tolerance."""

    def __init__(self, message: str, *, estimate: complex | float | None = None, error: float | None = None):
        self.estimate = estimate
        self.error = error
        super().__init__(message)


class SampleFailure(MesoError):
    """A per-sample unit of work failed inside an experiment."""

    def __init__(self, seed: int, sample_index: int, cause: BaseException):
        self.seed = seed
        self.sample_index = sample_index
        self.cause = cause
        super().__init__(f"Sample {sample_index} (seed {seed}) failed: {cause}")
