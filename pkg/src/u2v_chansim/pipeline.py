"""End-to-end orchestration: clouds -> features -> predictions -> clusters ->
channel realization -> correlation statistics, with CSV/VXG outputs.

Every stage failure is wrapped in a StageError naming the stage so the CLI
can report it and exit with the stage-failure code.  All randomness derives
from the manifest seed, so identical manifests produce byte-identical
outputs.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .channel import ChannelGeometry, ChannelRealization, export_transfer_grid, realize
from .clusters import ClusterSet, classify, extract_clusters, sets_from_tracks, track, write_cluster_csv
from .core import Trajectory, VoxelGrid
from .errors import ConfigError, FormatError, StageError
from .files import read_cloud_csv, read_trajectory_csv
from .lidar import (
    SENSOR_LOCAL,
    FilterConfig,
    distance_features,
    filter_valid,
    register,
    to_world,
    voxelize_counts,
)
from .manifest import ScenarioManifest, manifest_header_lines, parse_manifest
from .prediction import (
    METRICS_CSV_HEADER,
    BaselineParams,
    MetricsReport,
    RawPredictionGrid,
    ScattererGrid,
    baseline_predict,
    evaluate,
    evaluate_many,
    load_predictions,
    load_truth,
    round_predictions,
    store_predictions,
)
from .stats import dpsd, fcf, make_realizer, tacf
from . import vxg


@dataclass
class PipelineResult:
    features: list[VoxelGrid] = field(default_factory=list)
    predictions: list[RawPredictionGrid] = field(default_factory=list)
    rounded: list[ScattererGrid] = field(default_factory=list)
    metrics: list[MetricsReport] = field(default_factory=list)
    cluster_sets: list[ClusterSet] = field(default_factory=list)
    realization: ChannelRealization | None = None
    outputs: list[Path] = field(default_factory=list)


def _require_file(stage: str, path: Path) -> Path:
    if not Path(path).is_file():
        raise StageError(stage, f"missing file {path}")
    return path


def split_indices(n: int, seed: int) -> dict[str, list[int]]:
    """Deterministic 3:1:1 train/validation/test split.

    Indices are ordered by a hash of (seed, index) and cut at 3/5 and 4/5,
    which makes the ratio exact whenever n is a multiple of five.
    """
    def digest(i: int) -> str:
        return hashlib.blake2b(f"{seed}:{i}".encode(), digest_size=8).hexdigest()

    order = sorted(range(n), key=lambda i: (digest(i), i))
    n_train = (3 * n) // 5
    n_val = (n - n_train) // 2
    return {"train": sorted(order[:n_train]),
            "val": sorted(order[n_train:n_train + n_val]),
            "test": sorted(order[n_train + n_val:])}


def load_trajectories(manifest: ScenarioManifest) -> tuple[Trajectory, Trajectory]:
    stage = "preprocess"
    tx = read_trajectory_csv(_require_file(stage, manifest.path_for("trajectory_tx")))
    rx = read_trajectory_csv(_require_file(stage, manifest.path_for("trajectory_rx")))
    expect = manifest.times
    for name, traj in (("tx", tx), ("rx", rx)):
        if traj.times.size != expect.size or \
                not np.allclose(traj.times, expect, atol=1e-9, rtol=0):
            raise StageError(stage, f"{name} trajectory times do not match the "
                                    f"scenario grid (snapshots x dt)")
    return tx, rx


def preprocess_snapshot(manifest: ScenarioManifest, k: int,
                        tx_traj: Trajectory, rx_traj: Trajectory) -> VoxelGrid:
    """Feature grid [density, D_Tx, D_Rx] for snapshot k."""
    stage = "preprocess"
    t = float(manifest.times[k])
    tx_pose = tx_traj.pose_at(t)
    rx_pose = rx_traj.pose_at(t)
    clouds = []
    for role, pose in (("clouds_tx", tx_pose), ("clouds_rx", rx_pose)):
        path = _require_file(stage, manifest.path_for(role, k))
        try:
            cloud = read_cloud_csv(path, manifest.cloud_frame)
        except FormatError as exc:
            raise StageError(stage, str(exc)) from exc
        if cloud.frame == SENSOR_LOCAL:
            cloud = to_world(cloud, pose, manifest.transform_convention)
        clouds.append(cloud)
    cfg = FilterConfig(manifest.roi, manifest.height_threshold)
    valid = filter_valid(register(clouds[0], clouds[1]), cfg)
    density = voxelize_counts(valid, manifest.roi)
    dists = distance_features(manifest.roi, tx_pose.position, rx_pose.position)
    return VoxelGrid(manifest.roi, np.concatenate([density.values, dists.values]))


def _preprocess_worker(args) -> np.ndarray:
    manifest_path, k = args
    manifest = parse_manifest(manifest_path)
    tx, rx = load_trajectories(manifest)
    return preprocess_snapshot(manifest, k, tx, rx).values


def run_preprocess(manifest: ScenarioManifest, manifest_path=None,
                   jobs: int = 1) -> list[VoxelGrid]:
    tx, rx = load_trajectories(manifest)
    ks = range(manifest.snapshots)
    if jobs > 1 and manifest_path is not None and manifest.snapshots > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            grids = list(pool.map(_preprocess_worker,
                                  [(str(manifest_path), k) for k in ks]))
        return [VoxelGrid(manifest.roi, values) for values in grids]
    return [preprocess_snapshot(manifest, k, tx, rx) for k in ks]


def _baseline_params(manifest: ScenarioManifest,
                     features: list[VoxelGrid]) -> BaselineParams:
    params = manifest.baseline
    if manifest.predictor.params.get("d_norm_auto"):
        first = features[0].values
        d_norm = float((first[1] + first[2]).mean())
        params = BaselineParams(params.alpha, params.beta,
                                d_norm if d_norm > 0 else 1.0,
                                params.round_threshold)
    return params


def run_predict(manifest: ScenarioManifest,
                features: list[VoxelGrid]) -> list[RawPredictionGrid]:
    stage = "predictor"
    if manifest.predictor.kind == "file":
        grids = []
        for k in range(manifest.snapshots):
            path = _require_file(stage, manifest.path_for("prediction_grids", k))
            try:
                grids.append(load_predictions(path, expected_roi=manifest.roi))
            except FormatError as exc:
                raise StageError(stage, str(exc)) from exc
        return grids
    params = _baseline_params(manifest, features)
    return [baseline_predict(grid, params) for grid in features]


def run_evaluate(manifest: ScenarioManifest,
                 rounded: list[ScattererGrid]) -> list[MetricsReport]:
    stage = "evaluate"
    reports = []
    for k, pred in enumerate(rounded):
        path = _require_file(stage, manifest.path_for("truth_grids", k))
        try:
            truth = load_truth(path, expected_roi=manifest.roi)
        except FormatError as exc:
            raise StageError(stage, str(exc)) from exc
        reports.append(evaluate(pred, truth))
    return reports


def _write_lines(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def run_pipeline(manifest: ScenarioManifest, manifest_path=None, jobs: int = 1,
                 stats_only: bool = False) -> PipelineResult:
    """Execute every stage and write the result files into out_dir."""
    result = PipelineResult()
    out = manifest.out_dir

    result.features = run_preprocess(manifest, manifest_path, jobs)
    result.predictions = run_predict(manifest, result.features)

    try:
        tau = manifest.baseline.round_threshold
        result.rounded = [round_predictions(g, tau) for g in result.predictions]
    except ConfigError:
        raise
    except ValueError as exc:
        raise StageError("rounding", str(exc)) from exc

    if manifest.has_role("truth_grids") and not stats_only:
        result.metrics = run_evaluate(manifest, result.rounded)

    try:
        sets = [classify(extract_clusters(grid, float(t)), manifest.h_c)
                for grid, t in zip(result.rounded, manifest.times)]
        tracks = track(sets, manifest.r_match)
        result.cluster_sets = sets_from_tracks(tracks, manifest.times, manifest.roi)
    except ValueError as exc:
        raise StageError("clustering", str(exc)) from exc

    tx, rx = load_trajectories(manifest)
    try:
        geometry = ChannelGeometry(tx, rx, tuple(tracks), manifest.rf,
                                   manifest.stochastic)
        result.realization = realize(
            geometry, np.random.SeedSequence(entropy=(manifest.seed, 1)))
    except ValueError as exc:
        raise StageError("channel", str(exc)) from exc

    try:
        stats_files = _run_stats(manifest, geometry, out)
    except ValueError as exc:
        raise StageError("stats", str(exc)) from exc

    if not stats_only:
        metrics_path = out / "metrics.csv"
        if result.metrics:
            lines = [METRICS_CSV_HEADER]
            lines += [r.csv_row(k) for k, r in enumerate(result.metrics)]
            micro = evaluate_many(
                [(p, load_truth(manifest.path_for("truth_grids", k), manifest.roi))
                 for k, p in enumerate(result.rounded)], reduce="micro")
            lines.append(micro.csv_row("micro"))
            _write_lines(metrics_path, lines)
            result.outputs.append(metrics_path)
        clusters_path = out / "clusters.csv"
        write_cluster_csv(clusters_path, result.cluster_sets)
        result.outputs.append(clusters_path)
        cir_path = out / "cir.csv"
        result.realization.write_cir_csv(cir_path)
        result.outputs.append(cir_path)
    result.outputs.extend(stats_files)
    return result


def _run_stats(manifest: ScenarioManifest, geometry: ChannelGeometry,
               out: Path) -> list[Path]:
    """TACF, DPSD, and FCF at a mid-run anchor, written as plot CSVs."""
    times = manifest.times
    n = times.size
    anchor_idx = min(n // 4, max(0, n - 2))
    anchor_t = float(times[anchor_idx])
    n_lags = min(256, n - anchor_idx)
    lags = np.arange(n_lags) * manifest.dt
    realizer = make_realizer(geometry)
    f_c = manifest.rf.carrier_freq_hz
    r = manifest.realizations
    header = manifest_header_lines(manifest)
    written = []

    tacf_values = tacf(realizer, anchor_t, f_c, lags, n_realizations=r,
                       seed=(manifest.seed, 2))
    path = out / "tacf.csv"
    lines = header + [f"# anchor_t_s = {anchor_t:.9g}", "delta_t_s,abs_tacf"]
    lines += [f"{lag:.9g},{abs(v):.9g}" for lag, v in zip(lags, tacf_values)]
    _write_lines(path, lines)
    written.append(path)

    if n_lags >= 2:
        spectrum = dpsd(tacf_values, manifest.dt)
        path = out / "dpsd.csv"
        lines = header + [f"# anchor_t_s = {anchor_t:.9g}",
                          f"# resolution_hz = {spectrum.resolution:.9g}",
                          "f_d_hz,dpsd"]
        lines += [f"{f:.9g},{v:.9g}"
                  for f, v in zip(spectrum.frequencies, spectrum.values)]
        _write_lines(path, lines)
        written.append(path)

    df_grid = np.linspace(0.0, manifest.rf.bandwidth_hz / 2.0, 33)
    fcf_values = fcf(realizer, anchor_t, f_c, df_grid, n_realizations=r,
                     seed=(manifest.seed, 3))
    path = out / "fcf.csv"
    lines = header + [f"# anchor_t_s = {anchor_t:.9g}", "delta_f_hz,abs_fcf"]
    lines += [f"{df:.9g},{abs(v):.9g}" for df, v in zip(df_grid, fcf_values)]
    _write_lines(path, lines)
    written.append(path)

    realization = realize(geometry, np.random.SeedSequence(entropy=(manifest.seed, 1)))
    freqs = f_c + np.linspace(-manifest.rf.bandwidth_hz / 2.0,
                              manifest.rf.bandwidth_hz / 2.0, 9)
    path = out / "transfer_grid.vxg"
    path.parent.mkdir(parents=True, exist_ok=True)
    export_transfer_grid(path, realization, freqs)
    written.append(path)
    return written


def write_feature_grids(manifest: ScenarioManifest, features: list[VoxelGrid],
                        out: Path) -> list[Path]:
    paths = []
    for k, grid in enumerate(features):
        path = out / "features" / f"features_{k:04d}.vxg"
        vxg.write_vxg(path, grid)
        paths.append(path)
    return paths


def write_prediction_grids(manifest: ScenarioManifest,
                           predictions: list[RawPredictionGrid],
                           out: Path) -> list[Path]:
    paths = []
    for k, grid in enumerate(predictions):
        path = out / "predictions" / f"pred_{k:04d}.vxg"
        store_predictions(grid, path)
        paths.append(path)
    return paths
