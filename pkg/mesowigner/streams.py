"""Counter-based random streams.

Every stream is a ``numpy.random.Generator`` over a ``Philox`` bit generator
keyed by a ``SeedSequence`` of the master seed and a tuple of integer keys.
Two calls with the same keys return identical streams, independent of how
many other streams were derived before, so parallel work can draw its
randomness in any order.

The first key names the purpose of the stream so that matrix entries and,
say, Gaussian path coefficients never share randomness.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ConfigurationError

__all__ = ["MATRIX", "PATH", "SYNTHETIC", "CERTIFY", "check_seed", "derive", "matrix_row_stream"]

# Stream purposes
MATRIX = 0
PATH = 1
SYNTHETIC = 2
CERTIFY = 3

_SEED_MASK = (1 << 64) - 1


def check_seed(seed: int) -> int:
    """Return ``seed`` if it is a 64-bit unsigned integer.

    :raises ConfigurationError: otherwise.
    """
    if not 0 <= seed <= _SEED_MASK:
        raise ConfigurationError(f"Master seed must be a 64-bit unsigned integer, got {seed}")
    return seed


def derive(seed: int, *keys: int) -> np.random.Generator:
    """Return the stream identified by ``(seed, *keys)``.

    :param seed: 64-bit unsigned master seed.
    :param keys: Non-negative integers locating the stream.
    """
    check_seed(seed)
    if any(int(k) < 0 for k in keys):
        raise ConfigurationError(f"Stream keys must be non-negative, got {keys}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(sequence))


def matrix_row_stream(seed: int, sample_index: int, row: int) -> np.random.Generator:
    """Stream drawing row ``row`` of the upper triangle of sample ``sample_index``."""
    return derive(seed, MATRIX, sample_index, row)
