"""Scatterer-count prediction and voxel-occupancy evaluation.

The predictor is pluggable: per-snapshot grids may be loaded from VXG files
(produced by an external model) or computed by the built-in density/distance
baseline.  Raw non-negative estimates are rounded to integer counts with a
fractional threshold, and occupancy is scored with precision/recall/F1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .core import Roi, VoxelGrid
from .errors import ConfigError, FormatError
from . import vxg

METRICS_CSV_HEADER = "snapshot_id,tp,fp,fn,tn,precision,recall,f1"


@dataclass(frozen=True)
class RawPredictionGrid:
    """Non-negative real per-voxel scatterer estimates (pre-rounding)."""

    roi: Roi
    values: np.ndarray = field(repr=False)  # (g_x, g_y, g_z)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.roi.dims:
            raise ValueError(f"prediction shape {values.shape} does not match "
                             f"ROI dims {self.roi.dims}")
        if not np.isfinite(values).all() or (values < 0).any():
            raise ValueError("raw predictions must be finite and non-negative")
        values = np.ascontiguousarray(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ScattererGrid:
    """Integer per-voxel scatterer counts."""

    roi: Roi
    counts: np.ndarray = field(repr=False)  # (g_x, g_y, g_z) int64

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.shape != self.roi.dims:
            raise ValueError(f"count shape {counts.shape} does not match "
                             f"ROI dims {self.roi.dims}")
        if not np.issubdtype(counts.dtype, np.integer):
            rounded = np.rint(counts)
            if not np.allclose(counts, rounded, atol=1e-6):
                raise ValueError("scatterer counts must be integral")
            counts = rounded
        counts = np.ascontiguousarray(counts.astype(np.int64))
        if (counts < 0).any():
            raise ValueError("scatterer counts must be non-negative")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def occupancy(self) -> np.ndarray:
        return self.counts != 0


@dataclass(frozen=True)
class MetricsReport:
    """Occupancy confusion counts and derived scores.

    When a score's denominator is zero the score is reported as 0.0 and the
    matching degenerate flag is set.  mean_abs_count_error is an extra
    count-level diagnostic on top of the occupancy scores.
    """

    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    degenerate_precision: bool = False
    degenerate_recall: bool = False
    degenerate_f1: bool = False
    mean_abs_count_error: float = 0.0

    def csv_row(self, snapshot_id) -> str:
        return (f"{snapshot_id},{self.tp},{self.fp},{self.fn},{self.tn},"
                f"{self.precision:.9g},{self.recall:.9g},{self.f1:.9g}")


@dataclass(frozen=True)
class PredictorSpec:
    """Which predictor to run: "file" loads VXG grids, "baseline" computes
    the built-in heuristic."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("file", "baseline"):
            raise ConfigError(f"unknown predictor kind {self.kind!r}")
        tau = self.params.get("round_threshold")
        if tau is not None:
            _check_round_threshold(tau)


@dataclass(frozen=True)
class BaselineParams:
    alpha: float = 1.0
    beta: float = 1.0
    d_norm: float = 1.0
    round_threshold: float = 0.5

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be non-negative")
        if not self.d_norm > 0:
            raise ConfigError("d_norm must be positive")
        _check_round_threshold(self.round_threshold)


def _check_round_threshold(tau: float):
    # tau = 0 would bump every exact integer up by one, so it is rejected
    if not 0.0 < tau <= 1.0:
        raise ConfigError(f"round_threshold must lie in (0, 1], got {tau}")


def round_predictions(raw: RawPredictionGrid, round_threshold: float) -> ScattererGrid:
    """Threshold rounding: count = floor + 1 where the fractional part
    reaches the threshold, floor otherwise."""
    _check_round_threshold(round_threshold)
    floor = np.floor(raw.values)
    frac = raw.values - floor
    counts = floor + (frac >= round_threshold)
    return ScattererGrid(raw.roi, counts.astype(np.int64))


def evaluate(pred: ScattererGrid, truth: ScattererGrid) -> MetricsReport:
    """Occupancy confusion (occupied means count != 0) plus P/R/F1."""
    if pred.counts.shape != truth.counts.shape or not pred.roi.approx_equal(truth.roi):
        raise ValueError("prediction and truth grids must share the same ROI")
    p, t = pred.occupancy, truth.occupancy
    tp = int(np.sum(t & p))
    fp = int(np.sum(~t & p))
    fn = int(np.sum(t & ~p))
    tn = int(np.sum(~t & ~p))
    mace = float(np.abs(pred.counts - truth.counts).mean())
    return _scores(tp, fp, fn, tn, mace)


def _scores(tp: int, fp: int, fn: int, tn: int, mace: float) -> MetricsReport:
    deg_p = tp + fp == 0
    deg_r = tp + fn == 0
    precision = 0.0 if deg_p else tp / (tp + fp)
    recall = 0.0 if deg_r else tp / (tp + fn)
    deg_f = precision + recall == 0.0
    f1 = 0.0 if deg_f else 2.0 * precision * recall / (precision + recall)
    return MetricsReport(tp, fp, fn, tn, precision, recall, f1,
                         deg_p, deg_r, deg_f, mace)


def evaluate_many(pairs: Iterable[tuple[ScattererGrid, ScattererGrid]],
                  reduce: str = "micro") -> MetricsReport:
    """Aggregate metrics over several snapshots.

    micro pools the confusion counts from all voxels of all snapshots;
    macro averages the per-snapshot scores (counts are still pooled for
    reference).
    """
    reports = [evaluate(p, t) for p, t in pairs]
    if not reports:
        raise ValueError("evaluate_many needs at least one pair")
    tp = sum(r.tp for r in reports)
    fp = sum(r.fp for r in reports)
    fn = sum(r.fn for r in reports)
    tn = sum(r.tn for r in reports)
    mace = float(np.mean([r.mean_abs_count_error for r in reports]))
    if reduce == "micro":
        return _scores(tp, fp, fn, tn, mace)
    if reduce == "macro":
        micro = _scores(tp, fp, fn, tn, mace)
        return replace(micro,
                       precision=float(np.mean([r.precision for r in reports])),
                       recall=float(np.mean([r.recall for r in reports])),
                       f1=float(np.mean([r.f1 for r in reports])))
    raise ValueError(f"unknown reducer {reduce!r}")


def baseline_predict(features: VoxelGrid, params: BaselineParams) -> RawPredictionGrid:
    """Heuristic stand-in predictor.

    Estimate per voxel: alpha * density * exp(-beta * (D_Tx + D_Rx) / d_norm).
    Monotone in density at fixed distances and non-negative everywhere.
    """
    if features.channels != 3:
        raise ValueError("baseline_predict expects a 3-channel feature grid")
    density = features.values[0]
    path_len = features.values[1] + features.values[2]
    raw = params.alpha * density * np.exp(-params.beta * path_len / params.d_norm)
    return RawPredictionGrid(features.roi, raw)


DEFAULT_ALPHAS = (0.0, 0.25, 0.5, 1.0, 2.0, 4.0)
DEFAULT_BETAS = (0.0, 0.5, 1.0, 2.0)
DEFAULT_THRESHOLDS = (0.3, 0.5, 0.7)


def calibrate_baseline(training_pairs: Sequence[tuple[VoxelGrid, ScattererGrid]],
                       alphas: Sequence[float] = DEFAULT_ALPHAS,
                       betas: Sequence[float] = DEFAULT_BETAS,
                       round_thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
                       d_norm: float | None = None) -> BaselineParams:
    """Grid-search baseline parameters minimizing mean squared count error.

    Deterministic: the lattice is scanned in sorted order and ties keep the
    earliest candidate, so an all-zero target selects alpha = 0.
    """
    pairs = list(training_pairs)
    if not pairs:
        raise ValueError("calibrate_baseline needs a nonempty training set")
    if d_norm is None:
        first = pairs[0][0]
        d_norm = float((first.values[1] + first.values[2]).mean())
        if not d_norm > 0:
            d_norm = 1.0
    best = None
    best_err = math.inf
    for alpha in sorted(alphas):
        for beta in sorted(betas):
            for tau in sorted(round_thresholds):
                params = BaselineParams(alpha, beta, d_norm, tau)
                err = 0.0
                n = 0
                for features, truth in pairs:
                    pred = round_predictions(baseline_predict(features, params), tau)
                    err += float(((pred.counts - truth.counts) ** 2).sum())
                    n += truth.counts.size
                err /= n
                if err < best_err:
                    best, best_err = params, err
    return best


def store_predictions(grid: RawPredictionGrid, path) -> None:
    """Write a raw prediction grid as a single-channel VXG file."""
    vxg.write_vxg(path, VoxelGrid(grid.roi, grid.values[None, ...]))


def load_predictions(path, expected_roi: Roi | None = None) -> RawPredictionGrid:
    """Load a single-channel VXG prediction grid, optionally checking the ROI."""
    grid = vxg.read_vxg(path)
    if grid.channels != 1:
        raise FormatError(f"{path}: prediction grids are single-channel, "
                          f"file has {grid.channels}")
    if expected_roi is not None and not grid.roi.approx_equal(expected_roi):
        raise FormatError(f"{path}: grid ROI does not match the manifest ROI")
    if (grid.values < 0).any():
        raise FormatError(f"{path}: prediction values must be non-negative")
    return RawPredictionGrid(grid.roi, grid.values[0])


def load_truth(path, expected_roi: Roi | None = None) -> ScattererGrid:
    """Load a single-channel VXG of integral scatterer counts."""
    raw = load_predictions(path, expected_roi)
    rounded = np.rint(raw.values)
    if not np.allclose(raw.values, rounded, atol=1e-6):
        raise FormatError(f"{path}: truth grids must hold integer counts")
    return ScattererGrid(raw.roi, rounded.astype(np.int64))
