"""Complex Wigner ensembles and their spectra.

The implemented entry laws are:

===================== =========================================== ========= ==========
kind                  off-diagonal law                            E|W|^4    beta
===================== =========================================== ========= ==========
GUE                   standard complex Gaussian (X + iY)/sqrt(2)  2         1
FourPhase             uniform on {1, i, -1, -i}                   1         0
ComplexUniformDisk    uniform on the disk of radius sqrt(2)       4/3       1/3
===================== =========================================== ========= ==========

All three have mean 0, E|W|^2 = 1 and E W^2 = 0 and are sub-Gaussian. The
diagonal is real with mean 0 and variance 1: a standard Gaussian for GUE and
a Rademacher sign otherwise. ``beta = E(|W|^2 - 1)^2`` is the fourth-moment
lever of the universality experiment.

A sample is the normalized matrix ``W / sqrt(n)``. Row ``i`` of the upper
triangle is drawn from its own counter-based stream
(:func:`mesowigner.streams.matrix_row_stream`), first the diagonal entry then
the entries ``j > i`` in order, so entry ``(i, j)`` is a pure function of
``(seed, sample_index, i, j)``.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Iterator
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.linalg

from .conf import settings
from .constants import EnsembleKind
from .exceptions import ConfigurationError, EigensolveError
from .streams import CERTIFY, check_seed, derive, matrix_row_stream
from .utilities.persistence import read_csv, write_csv, write_json

__all__ = [
    "EnsembleSpec",
    "WignerSample",
    "Spectrum",
    "EntryMoments",
    "entry_moments",
    "sample_entry",
    "sample_entries",
    "sample_diagonal",
    "sample_wigner",
    "compute_spectrum",
    "sample_spectra",
    "spectrum_basename",
    "save_spectrum",
    "load_spectrum",
]

logger = logging.getLogger(__name__)

RESIDUAL_RTOL = 1e-10
_DISK_RADIUS = np.sqrt(2.0)
_FOUR_PHASES = np.array([1.0, 1.0j, -1.0, -1.0j])


@dataclass(frozen=True, slots=True)
class EnsembleSpec:
    """Identifies one matrix draw: law, dimension and seed provenance."""

    kind: EnsembleKind
    n: int
    seed: int = 0
    sample_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", EnsembleKind(self.kind))
        if self.n < 1:
            raise ConfigurationError(f"Matrix dimension must be at least 1, got n={self.n}")
        if self.sample_index < 0:
            raise ConfigurationError(f"sample_index must be non-negative, got {self.sample_index}")
        check_seed(self.seed)

    def with_index(self, sample_index: int) -> EnsembleSpec:
        return replace(self, sample_index=sample_index)

    def to_dict(self) -> dict:
        data = asdict(self)
        data["kind"] = self.kind.value
        return data


@dataclass(frozen=True)
class WignerSample:
    """A normalized Hermitian matrix ``W / sqrt(n)``."""

    entries: np.ndarray
    spec: EnsembleSpec | None = None


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues of one sample."""

    eigenvalues: np.ndarray
    spec: EnsembleSpec | None = None
    n: int = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.eigenvalues, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ConfigurationError("A spectrum needs a non-empty vector of eigenvalues")
        if np.any(np.diff(values) < 0):
            values = np.sort(values)
        object.__setattr__(self, "eigenvalues", values)
        object.__setattr__(self, "n", values.size)

    @classmethod
    def from_values(cls, values: Iterable[float]) -> Spectrum:
        """Build a spectrum from raw numbers (no provenance)."""
        return cls(np.asarray(list(values), dtype=float))


@dataclass(frozen=True, slots=True)
class EntryMoments:
    second: float  # E|W|^2
    pseudo_second: complex  # E W^2
    fourth: float  # E|W|^4

    @property
    def beta(self) -> float:
        """E(|W|^2 - 1)^2, which equals E|W|^4 - 1 when E|W|^2 = 1."""
        return self.fourth - 2 * self.second + 1


_MOMENTS = {
    EnsembleKind.GUE: EntryMoments(1.0, 0j, 2.0),
    EnsembleKind.FOUR_PHASE: EntryMoments(1.0, 0j, 1.0),
    EnsembleKind.COMPLEX_UNIFORM_DISK: EntryMoments(1.0, 0j, 4.0 / 3.0),
}


def entry_moments(kind: EnsembleKind | str) -> EntryMoments:
    """Analytic moments of the off-diagonal law of ``kind``."""
    return _MOMENTS[EnsembleKind(kind)]


def sample_entries(kind: EnsembleKind | str, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` off-diagonal entries of the given law.

    :returns: complex array of shape ``(size,)``.
    """
    kind = EnsembleKind(kind)
    if kind is EnsembleKind.GUE:
        parts = rng.standard_normal((size, 2))
        return (parts[:, 0] + 1j * parts[:, 1]) / np.sqrt(2.0)
    if kind is EnsembleKind.FOUR_PHASE:
        return _FOUR_PHASES[rng.integers(0, 4, size=size)]
    # Uniform on the disk: radius R*sqrt(U) has the right area density.
    uniform = rng.random((size, 2))
    radius = _DISK_RADIUS * np.sqrt(uniform[:, 0])
    return radius * np.exp(2j * np.pi * uniform[:, 1])


def sample_entry(kind: EnsembleKind | str, rng: np.random.Generator) -> complex:
    """Draw one off-diagonal entry of the given law."""
    return complex(sample_entries(kind, rng, 1)[0])


def sample_diagonal(kind: EnsembleKind | str, rng: np.random.Generator) -> float:
    """Draw one real diagonal entry (mean 0, variance 1)."""
    if EnsembleKind(kind) is EnsembleKind.GUE:
        return float(rng.standard_normal())
    return float(2 * rng.integers(0, 2) - 1)


def sample_wigner(spec: EnsembleSpec) -> WignerSample:
    """Sample the normalized Hermitian matrix identified by ``spec``.

    Only the upper triangle is drawn; the lower triangle is its conjugate
    transpose, so the result is Hermitian to the last bit.
    """
    n = spec.n
    upper = np.zeros((n, n), dtype=complex)
    diagonal = np.empty(n)
    for row in range(n):
        rng = matrix_row_stream(spec.seed, spec.sample_index, row)
        diagonal[row] = sample_diagonal(spec.kind, rng)
        if row + 1 < n:
            upper[row, row + 1 :] = sample_entries(spec.kind, rng, n - row - 1)
    entries = upper + upper.conj().T
    entries[np.diag_indices(n)] = diagonal
    entries /= np.sqrt(n)
    return WignerSample(entries=entries, spec=spec)


def _certify_residuals(matrix: np.ndarray, values: np.ndarray, vectors: np.ndarray, checks: int, spec) -> None:
    """Spot-check ``max_j ||H v_j - lambda_j v_j|| <= RESIDUAL_RTOL * ||H||_F``."""
    n = values.size
    rng = derive(spec.seed if spec else 0, CERTIFY, spec.sample_index if spec else 0)
    columns = rng.choice(n, size=min(checks, n), replace=False)
    residuals = matrix @ vectors[:, columns] - vectors[:, columns] * values[columns]
    worst = float(np.max(np.linalg.norm(residuals, axis=0)))
    bound = RESIDUAL_RTOL * float(np.linalg.norm(matrix))
    if worst > bound:
        raise EigensolveError(
            f"Eigenvector residual {worst:.3e} exceeds {bound:.3e}",
            seed=spec.seed if spec else None,
            sample_index=spec.sample_index if spec else None,
        )


def compute_spectrum(sample: WignerSample, spot_checks: int | None = None) -> Spectrum:
    """Compute all eigenvalues of ``sample``, ascending.

    Uses LAPACK's divide-and-conquer Hermitian solver (Householder
    tridiagonalization followed by a tridiagonal eigensolve).

    :param spot_checks: Number of randomly chosen eigenpairs whose residual is
        certified, ``MESOWIGNER_SPOT_CHECKS`` by default; ``0`` skips the
        eigenvectors entirely.
    :raises EigensolveError: If LAPACK reports non-convergence or a residual
        check fails.
    """
    spec = sample.spec
    if spot_checks is None:
        spot_checks = settings.SPOT_CHECKS
    try:
        if spot_checks:
            values, vectors = scipy.linalg.eigh(sample.entries, check_finite=True)
        else:
            values = scipy.linalg.eigh(sample.entries, eigvals_only=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise EigensolveError(
            f"Eigensolve failed for {spec}: {exc}",
            seed=spec.seed if spec else None,
            sample_index=spec.sample_index if spec else None,
        ) from exc
    if spot_checks:
        _certify_residuals(sample.entries, values, vectors, spot_checks, spec)
    return Spectrum(eigenvalues=values, spec=spec)


def sample_spectra(template: EnsembleSpec, indices: Iterable[int]) -> Iterator[Spectrum]:
    """Yield the spectra of ``template`` for each sample index, in order."""
    for index in indices:
        logger.debug("Sampling %s n=%d index=%d", template.kind.value, template.n, index)
        yield compute_spectrum(sample_wigner(template.with_index(index)))


def spectrum_basename(spec: EnsembleSpec) -> str:
    return f"{spec.kind.value}_n{spec.n}_seed{spec.seed}_s{spec.sample_index}"


def save_spectrum(spectrum: Spectrum, directory: str | Path) -> Path:
    """Write ``<basename>.csv`` (one eigenvalue per row) and a JSON sidecar.

    :returns: Path of the CSV file.
    """
    if spectrum.spec is None:
        raise ConfigurationError("Only spectra with an EnsembleSpec can be persisted")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    base = directory / spectrum_basename(spectrum.spec)
    csv_path = base.with_suffix(".csv")
    write_csv(csv_path, ["eigenvalue"], ([repr(float(v))] for v in spectrum.eigenvalues))
    write_json(base.with_suffix(".json"), spectrum.spec.to_dict())
    return csv_path


def load_spectrum(csv_path: str | Path) -> Spectrum:
    """Read a spectrum written by :func:`save_spectrum`."""
    csv_path = Path(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    values = np.array([float(row["eigenvalue"]) for row in read_csv(csv_path)])
    return Spectrum(eigenvalues=values, spec=EnsembleSpec(**meta))
