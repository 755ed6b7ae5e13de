"""CSV files with JSON sidecars.

Every table written here is a plain CSV with a header row. Metadata that
describes how the table was produced goes into a JSON file of the same stem.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from .json import to_jsonable

__all__ = ["write_csv", "read_csv", "write_json", "write_grid_values", "write_path", "write_grid_function"]


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="") as handle:
        return list(csv.DictReader(handle))


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True))
    return path


def write_grid_values(
    path: str | Path, points, values: np.ndarray, metadata: dict | None = None, sample_indices=None
) -> Path:
    """Write ``(sample_index, tau, eta, re, im)`` rows.

    :param points: Sequence of ``MesoPoint``.
    :param values: Complex array of shape ``(samples, len(points))``.
    :param sample_indices: Sample index per row of ``values``; defaults to ``0..samples-1``.
    """
    values = np.atleast_2d(values)
    indices = range(values.shape[0]) if sample_indices is None else sample_indices
    rows = (
        (index, point.tau, point.eta, value.real, value.imag)
        for index, row in zip(indices, values)
        for point, value in zip(points, row)
    )
    path = write_csv(path, ["sample_index", "tau", "eta", "re", "im"], rows)
    if metadata is not None:
        write_json(Path(path).with_suffix(".json"), metadata)
    return path


def write_path(path: str | Path, gp_path, metadata: dict | None = None) -> Path:
    """Write a ``GPPath`` as ``(index, tau, eta, re, im)`` rows plus metadata."""
    rows = (
        (index, point.tau, point.eta, complex(value).real, complex(value).imag)
        for index, (point, value) in enumerate(zip(gp_path.points, gp_path.values))
    )
    path = write_csv(path, ["index", "tau", "eta", "re", "im"], rows)
    write_json(Path(path).with_suffix(".json"), {"origin": gp_path.origin, **(metadata or {})})
    return path


def write_grid_function(path: str | Path, grid) -> Path:
    """Write a ``GridFunction`` as ``(x, re, im)`` rows."""
    rows = ((x, v.real, v.imag) for x, v in zip(grid.x, np.asarray(grid.values, dtype=complex)))
    return write_csv(path, ["x", "re", "im"], rows)
