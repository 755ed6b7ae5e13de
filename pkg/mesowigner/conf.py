"""Package settings.

Each setting has a documented default and may be overridden through an
environment variable of the same name, e.g.::

    MESOWIGNER_WORKERS=4 mesowigner cov-v --config cov.json

Settings:

* ``MESOWIGNER_GRID_HALF_WIDTH``: half width of the default FFT grid (512).
* ``MESOWIGNER_GRID_POINTS``: number of points of the default FFT grid (2**20).
* ``MESOWIGNER_DECAY_TOL``: relative size a grid function may have at the
  grid ends before an FFT routine refuses it (1e-8).
* ``MESOWIGNER_SERIES_MAX_TERMS``: hard cap on Cayley series terms (100000).
* ``MESOWIGNER_SERIES_TOL``: admissible truncation error of the Cayley
  series, relative to the marginal standard deviation (1e-4).
* ``MESOWIGNER_CHOLESKY_RTOL``: pivot tolerance relative to the trace (1e-10).
* ``MESOWIGNER_HS_TOL``: Helffer–Sjöstrand quadrature tolerance (1e-4).
* ``MESOWIGNER_SPOT_CHECKS``: eigenpairs whose residual every eigensolve
  certifies (3).
* ``MESOWIGNER_WORKERS``: default worker count (1).
* ``MESOWIGNER_Z_BOUND``: |z| above which a report counts as rejected (3).
"""

from __future__ import annotations

import os
from contextlib import contextmanager
from typing import Any

__all__ = ["settings"]

DEFAULTS: dict[str, Any] = {
    "MESOWIGNER_GRID_HALF_WIDTH": 512.0,
    "MESOWIGNER_GRID_POINTS": 2**20,
    "MESOWIGNER_DECAY_TOL": 1e-8,
    "MESOWIGNER_SERIES_MAX_TERMS": 100_000,
    "MESOWIGNER_SERIES_TOL": 1e-4,
    "MESOWIGNER_CHOLESKY_RTOL": 1e-10,
    "MESOWIGNER_HS_TOL": 1e-4,
    "MESOWIGNER_SPOT_CHECKS": 3,
    "MESOWIGNER_WORKERS": 1,
    "MESOWIGNER_Z_BOUND": 3.0,
}


class Settings:
    """Attribute access to the settings, without the ``MESOWIGNER_`` prefix.

    ``settings.DECAY_TOL`` reads ``MESOWIGNER_DECAY_TOL`` from the environment
    and falls back to the default, cast to the default's type.
    """

    def __init__(self, defaults: dict[str, Any]):
        self._defaults = dict(defaults)
        self._overrides: dict[str, Any] = {}

    def __getattr__(self, name: str) -> Any:
        key = f"MESOWIGNER_{name}"
        if key not in self._defaults:
            raise AttributeError(name)
        if key in self._overrides:
            return self._overrides[key]
        default = self._defaults[key]
        raw = os.environ.get(key)
        if raw is None:
            return default
        return type(default)(float(raw)) if isinstance(default, int) else type(default)(raw)

    @contextmanager
    def override(self, **values: Any):
        """Temporarily replace settings, e.g. ``settings.override(WORKERS=4)``."""
        previous = dict(self._overrides)
        for name, value in values.items():
            key = f"MESOWIGNER_{name}"
            if key not in self._defaults:
                raise AttributeError(name)
            self._overrides[key] = value
        try:
            yield self
        finally:
            self._overrides = previous


settings = Settings(DEFAULTS)
