"""Per-sample units of work for the experiment harness.

Keep this module thin: each function turns one sample index into the raw
numbers an experiment reduces over. Orchestration, centring and reporting
live in :mod:`mesowigner.harness`.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from . import spectral
from .ensembles import EnsembleSpec, Spectrum, compute_spectrum, sample_wigner
from .spectral import MesoFrame, MesoPoint
from .testfunctions import TestFunction


def spectrum(template: EnsembleSpec, index: int, spot_checks: int | None = None) -> Spectrum:
    """Eigenvalues of sample ``index`` of ``template``."""
    return compute_spectrum(sample_wigner(template.with_index(index)), spot_checks=spot_checks)


def resolvent_traces(
    template: EnsembleSpec,
    frame: MesoFrame,
    points: Sequence[MesoPoint],
    index: int,
    spot_checks: int | None = None,
) -> np.ndarray:
    return spectral.resolvent_traces(spectrum(template, index, spot_checks), frame, points)


def linear_statistics(
    template: EnsembleSpec, frame: MesoFrame, functions: Sequence[TestFunction], index: int
) -> np.ndarray:
    values = spectrum(template, index)
    return np.array([spectral.linear_statistic(values, frame, f) for f in functions])


def traces_and_statistics(
    template: EnsembleSpec,
    frame: MesoFrame,
    points: Sequence[MesoPoint],
    functions: Sequence[TestFunction],
    index: int,
) -> tuple[np.ndarray, np.ndarray]:
    values = spectrum(template, index)
    traces = spectral.resolvent_traces(values, frame, points)
    return traces, np.array([spectral.linear_statistic(values, frame, f) for f in functions])


def log_char(template: EnsembleSpec, frame: MesoFrame, taus: Sequence[float], eta: float, index: int) -> np.ndarray:
    values = spectrum(template, index)
    return np.array([spectral.log_char_process(values, frame, tau, eta) for tau in taus])


def semicircle_ks(template: EnsembleSpec, index: int) -> float:
    return spectral.semicircle_ks(spectrum(template, index))


def stieltjes_deviation(
    template: EnsembleSpec, frame: MesoFrame, points: Sequence[MesoPoint], index: int
) -> np.ndarray:
    """``|s_N(w) - s(w)|`` at the spectral parameters ``w = E + z/d_N``."""
    values = spectrum(template, index)
    return np.array(
        [
            abs(spectral.empirical_stieltjes(values, frame.point(p)) - spectral.semicircle_stieltjes(frame.point(p)))
            for p in points
        ]
    )
