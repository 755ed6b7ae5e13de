from __future__ import annotations

import math
from collections.abc import Callable
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np


def _float_to_json(value: float) -> float | str:
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def to_jsonable(value: Any) -> Any:
    """
    Convert numerical results into JSON-serializable data.
    Rules:
    - complex -> {"re": ..., "im": ...}
    - numpy scalars -> Python scalars, numpy arrays -> (nested) lists
    - non-finite floats -> "inf" / "-inf" / "nan"
    - Enum -> its value, Path -> str
    - dataclass-like objects with ``to_dict`` -> converted dict
    - dict / list / tuple -> converted recursively
    - unknown complex objects -> str() fallback
    """
    if value is None or isinstance(value, (bool, str)):
        return value
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    for types, convert in _CONVERTERS:
        if isinstance(value, types):
            return convert(value)
    return str(value)


def _complex_to_json(value: complex) -> dict:
    return {"re": _float_to_json(float(value.real)), "im": _float_to_json(float(value.imag))}


def _array_to_json(value: np.ndarray) -> Any:
    return [to_jsonable(v) for v in value.tolist()] if value.ndim else to_jsonable(value.item())


# First match wins: numpy booleans before integers, enums before their mixin types.
_CONVERTERS: tuple[tuple[tuple[type, ...], Callable[[Any], Any]], ...] = (
    ((np.bool_,), bool),
    ((Enum,), lambda value: to_jsonable(value.value)),
    ((int, np.integer), int),
    ((float, np.floating), lambda value: _float_to_json(float(value))),
    ((complex, np.complexfloating), _complex_to_json),
    ((np.ndarray,), _array_to_json),
    ((Path,), str),
    ((dict,), lambda value: {str(k): to_jsonable(v) for k, v in value.items()}),
    ((list, tuple, set), lambda value: [to_jsonable(v) for v in value]),
)


def from_jsonable_complex(value: Any) -> complex | float:
    """Inverse of :func:`to_jsonable` for a single (possibly complex) number."""
    if isinstance(value, dict) and set(value) == {"re", "im"}:
        return complex(float(value["re"]), float(value["im"]))
    return float(value)
