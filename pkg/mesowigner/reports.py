"""Experiment reports: estimates with standard errors, targets and z-scores."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .conf import settings
from .constants import ExitCode
from .utilities.persistence import write_csv, write_json
from .utilities.statistics import z_score

__all__ = ["Estimate", "EstimateReport", "REJECTION_FLAG"]

# Set by experiments whose acceptance rule is not a plain z-score bound.
REJECTION_FLAG = "statistical_rejection"


def _parts(value) -> tuple[float, ...]:
    if isinstance(value, complex):
        return (value.real, value.imag)
    return (float(value),)


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate compared with a closed-form target.

    ``reference`` names the closed form the target comes from. Complex
    values carry their standard error as ``se(Re) + 1j * se(Im)``.
    """

    name: str
    value: complex | float
    se: complex | float
    target: complex | float | None = None
    reference: str = ""
    exploratory: bool = False

    def __post_init__(self):
        complex_valued = any(isinstance(v, complex) for v in (self.value, self.se, self.target))
        cast = complex if complex_valued else float
        object.__setattr__(self, "value", cast(self.value))
        object.__setattr__(self, "se", cast(self.se))
        if self.target is not None:
            object.__setattr__(self, "target", cast(self.target))
            if not self.reference:
                raise ValueError(f"Target of {self.name} needs a reference")

    @property
    def z(self) -> complex | float | None:
        if self.target is None:
            return None
        return z_score(self.value, self.target, self.se)

    @property
    def degenerate(self) -> bool:
        return any(math.isinf(part) for part in _parts(self.se))

    def max_abs_z(self) -> float:
        """Largest finite ``|z|`` over the real and imaginary parts (0 without target)."""
        z = self.z
        if z is None:
            return 0.0
        finite = [abs(part) for part in _parts(z) if not math.isnan(part)]
        return max(finite, default=0.0)

    def rejected(self, bound: float | None = None) -> bool:
        bound = settings.Z_BOUND if bound is None else bound
        return not self.exploratory and self.max_abs_z() > bound

    def as_exploratory(self) -> Estimate:
        return Estimate(self.name, self.value, self.se, self.target, self.reference, exploratory=True)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "se": self.se,
            "target": self.target,
            "reference": self.reference,
            "z": self.z,
            "exploratory": self.exploratory,
        }


@dataclass
class EstimateReport:
    """The outcome of one experiment.

    ``timing`` is kept apart from everything else: two runs with the same
    configuration and seed agree on :meth:`reproducible_dict` bit for bit.
    ``tables`` hold raw per-sample values and curve overlays; they are
    written next to the report but are not part of it.
    """

    experiment: str
    config: dict
    estimates: list[Estimate] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    exploratory: bool = False
    timing: dict = field(default_factory=dict)
    tables: dict[str, tuple[Sequence[str], list]] = field(default_factory=dict, repr=False)

    def add(self, estimate: Estimate) -> Estimate:
        if self.exploratory and not estimate.exploratory:
            estimate = estimate.as_exploratory()
        self.estimates.append(estimate)
        if estimate.degenerate:
            self.flag("degenerate_standard_error")
        return estimate

    def flag(self, name: str):
        if name not in self.flags:
            self.flags.append(name)

    def get(self, name: str) -> Estimate:
        for estimate in self.estimates:
            if estimate.name == name:
                return estimate
        raise KeyError(name)

    def rejections(self, bound: float | None = None) -> list[Estimate]:
        return [estimate for estimate in self.estimates if estimate.rejected(bound)]

    def exit_code(self, bound: float | None = None) -> ExitCode:
        if REJECTION_FLAG in self.flags or self.rejections(bound):
            return ExitCode.STATISTICAL_REJECTION
        return ExitCode.OK

    def reproducible_dict(self) -> dict:
        return {
            "experiment": self.experiment,
            "config": self.config,
            "estimates": [estimate.to_dict() for estimate in self.estimates],
            "flags": list(self.flags),
            "diagnostics": self.diagnostics,
            "exploratory": self.exploratory,
        }

    def to_dict(self) -> dict:
        return {**self.reproducible_dict(), "timing": self.timing}

    def save(self, directory: str | Path) -> Path:
        """Write ``report.json`` and one ``<name>.csv`` per table into ``directory``."""
        directory = Path(directory)
        for name, (header, rows) in self.tables.items():
            write_csv(directory / f"{name}.csv", header, rows)
        return write_json(directory / "report.json", self.to_dict())
