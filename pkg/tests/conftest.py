import json

import numpy as np
import pytest

from mesowigner.constants import EnsembleKind
from mesowigner.ensembles import EnsembleSpec, compute_spectrum, sample_wigner
from mesowigner.spectral import MesoFrame, MesoPoint


def max_abs_z(report):
    """Largest finite |z| over every estimate of a report."""
    return max((estimate.max_abs_z() for estimate in report.estimates), default=0.0)


@pytest.fixture
def gue_spec():
    return EnsembleSpec(EnsembleKind.GUE, 60, seed=7)


@pytest.fixture
def gue_spectrum(gue_spec):
    return compute_spectrum(sample_wigner(gue_spec))


@pytest.fixture
def frame():
    """Theorem-regime frame at the centre of the bulk, d_N = 60**0.25."""
    return MesoFrame(energy=0.0, gamma=0.25, n=60)


@pytest.fixture
def unit_point():
    return MesoPoint(0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def config_data():
    """A minimal valid experiment configuration document."""
    return {
        "experiment": "CovV",
        "ensemble": {"kind": "GUE", "n": 40},
        "frame": {"energy": 0.0, "gamma": 0.25},
        "grid": [[0.0, 1.0], [0.5, 1.0]],
        "samples": 4,
        "seed": 11,
    }


@pytest.fixture
def config_file(tmp_path, config_data):
    def write(**changes):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({**config_data, **changes}))
        return path

    return write
