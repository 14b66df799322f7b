"""Scenario manifests.

INI-style files: [section] headers, key = value lines, UTF-8, '#' comments.
Unknown sections or keys are rejected with their line number; missing
required keys and out-of-range values are rejected by name.  File entries
may be patterns with a {snapshot} placeholder and are resolved relative to
the manifest location.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .channel import StochasticParams
from .core import RfConfig, Roi
from .errors import ConfigError
from .lidar import CONVENTIONS, SENSOR_LOCAL, WORLD
from .prediction import BaselineParams, PredictorSpec
from .scene import SyntheticSceneSpec


def _parse_lines(text: str):
    """Yield (section, key, value, lineno) tuples."""
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            yield (section, None, None, lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if section is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, value = line.split("=", 1)
        yield (section, key.strip().lower(), value.strip(), lineno)


def _to_float(key, value, lineno):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} must be a number, got {value!r}")


def _to_int(key, value, lineno):
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key} must be an integer, got {value!r}")


def _to_floats(key, value, lineno, n):
    parts = [p for p in value.split(",") if p.strip()]
    if len(parts) != n:
        raise ConfigError(f"line {lineno}: {key} needs {n} comma-separated values")
    return tuple(_to_float(key, p, lineno) for p in parts)


_KNOWN_KEYS = {
    "scenario": {"snapshots", "dt", "seed", "transform_convention"},
    "roi": {"x_min", "x_max", "y_min", "y_max", "z_min", "z_max",
            "g_x", "g_y", "g_z", "height_threshold"},
    "clusters": {"h_c", "r_match"},
    "rf": {"carrier_freq_hz", "bandwidth_hz", "chi", "ricean_omega", "eta_gr",
           "window_start_s", "window_end_s"},
    "stochastic": {"xi", "eta", "sigma_e_db", "virtual_delay_rate_hz",
                   "gamma_gr", "cluster_amplitude_mode", "realizations"},
    "files": {"clouds_tx", "clouds_rx", "cloud_frame", "trajectory_tx",
              "trajectory_rx", "truth_grids", "prediction_grids", "out_dir"},
    "predictor": {"kind", "alpha", "beta", "d_norm", "round_threshold"},
    "scene": {"vehicles", "vehicle_size", "speed_min", "speed_max", "buildings",
              "building_size", "uav_height", "uav_speed", "lidar_rings",
              "lidar_azimuth_steps", "lidar_max_range", "uav_elevation_deg",
              "vehicle_elevation_deg", "scatterer_spacing"},
}

_REQUIRED = {
    "scenario": {"snapshots", "dt"},
    "roi": {"x_min", "x_max", "y_min", "y_max", "z_min", "z_max",
            "g_x", "g_y", "g_z"},
    "rf": {"carrier_freq_hz", "bandwidth_hz"},
    "files": {"clouds_tx", "clouds_rx", "trajectory_tx", "trajectory_rx"},
}


@dataclass(frozen=True)
class ScenarioManifest:
    base_dir: Path
    snapshots: int
    dt: float
    seed: int
    transform_convention: str
    roi: Roi
    height_threshold: float
    h_c: float
    r_match: float | None
    rf: RfConfig
    stochastic: StochasticParams
    realizations: int
    predictor: PredictorSpec
    baseline: BaselineParams
    cloud_frame: str
    file_patterns: dict = field(default_factory=dict)
    out_dir: Path = Path("out")
    scene: SyntheticSceneSpec | None = None

    @property
    def times(self):
        import numpy as np
        return np.arange(self.snapshots) * self.dt

    def path_for(self, role: str, snapshot: int | None = None) -> Path:
        pattern = self.file_patterns.get(role)
        if pattern is None:
            raise ConfigError(f"manifest defines no {role} entry")
        name = pattern.format(snapshot=snapshot) if snapshot is not None else pattern
        return self.base_dir / name

    def has_role(self, role: str) -> bool:
        return role in self.file_patterns


def parse_manifest(path, seed_override: int | None = None,
                   out_dir_override=None) -> ScenarioManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"manifest not found: {path}")

    values: dict[tuple[str, str], tuple[str, int]] = {}
    sections = set()
    for section, key, value, lineno in _parse_lines(text):
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown section [{section}]")
        sections.add(section)
        if key is None:
            continue
        if key not in _KNOWN_KEYS[section]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{section}]")
        if (section, key) in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} in [{section}]")
        values[(section, key)] = (value, lineno)

    for section, required in _REQUIRED.items():
        if section not in sections:
            raise ConfigError(f"missing required section [{section}]")
        for key in sorted(required):
            if (section, key) not in values:
                raise ConfigError(f"missing required key {key!r} in [{section}]")

    def get(section, key, default=None):
        return values.get((section, key), (default, 0))

    def get_float(section, key, default=None):
        value, lineno = get(section, key)
        return default if value is None else _to_float(key, value, lineno)

    def get_int(section, key, default=None):
        value, lineno = get(section, key)
        return default if value is None else _to_int(key, value, lineno)

    def get_str(section, key, default=None):
        value, _ = get(section, key)
        return default if value is None else value

    snapshots = get_int("scenario", "snapshots")
    if snapshots < 1:
        raise ConfigError("snapshots must be at least 1")
    dt = get_float("scenario", "dt")
    if not dt > 0:
        raise ConfigError("dt must be positive")
    seed = get_int("scenario", "seed", 0)
    if seed_override is not None:
        seed = seed_override
    convention = get_str("scenario", "transform_convention", "paper")
    if convention not in CONVENTIONS:
        raise ConfigError(f"transform_convention must be one of {CONVENTIONS}")

    try:
        roi = Roi(get_float("roi", "x_min"), get_float("roi", "x_max"),
                  get_float("roi", "y_min"), get_float("roi", "y_max"),
                  get_float("roi", "z_min"), get_float("roi", "z_max"),
                  get_int("roi", "g_x"), get_int("roi", "g_y"),
                  get_int("roi", "g_z"))
    except ValueError as exc:
        raise ConfigError(f"invalid [roi]: {exc}") from exc
    height_threshold = get_float("roi", "height_threshold", 0.0)

    h_c = get_float("clusters", "h_c", 3.0)
    r_match = get_float("clusters", "r_match", None)

    omega_raw = get_str("rf", "ricean_omega", "1.0")
    omega = omega_raw if omega_raw == "auto" else \
        _to_float("ricean_omega", omega_raw, get("rf", "ricean_omega")[1])
    window_start = get_float("rf", "window_start_s", 0.0)
    window_end = get_float("rf", "window_end_s", (snapshots - 1) * dt)
    rf = RfConfig(carrier_freq_hz=get_float("rf", "carrier_freq_hz"),
                  bandwidth_hz=get_float("rf", "bandwidth_hz"),
                  chi=get_float("rf", "chi", 0.0),
                  ricean_omega=omega,
                  eta_gr=get_float("rf", "eta_gr", 0.2),
                  window=(window_start, window_end))

    realizations = get_int("stochastic", "realizations", 50)
    if realizations < 1:
        raise ConfigError("realizations must be at least 1")
    stochastic = StochasticParams(
        xi=get_float("stochastic", "xi", 6.6e6),
        eta=get_float("stochastic", "eta", 0.0),
        sigma_e_db=get_float("stochastic", "sigma_e_db", 3.0),
        virtual_delay_rate_hz=get_float("stochastic", "virtual_delay_rate_hz", 1e8),
        gamma_gr=get_float("stochastic", "gamma_gr", 0.5),
        cluster_amplitude_mode=get_str("stochastic", "cluster_amplitude_mode",
                                       "linear_count"))

    kind = get_str("predictor", "kind", "baseline")
    round_threshold = get_float("predictor", "round_threshold", 0.5)
    d_norm = get_float("predictor", "d_norm", 0.0)
    baseline = BaselineParams(alpha=get_float("predictor", "alpha", 1.0),
                              beta=get_float("predictor", "beta", 1.0),
                              d_norm=d_norm if d_norm > 0 else 1.0,
                              round_threshold=round_threshold)
    predictor = PredictorSpec(kind, {"round_threshold": round_threshold,
                                     "d_norm_auto": not d_norm > 0})
    if kind == "file" and ("files", "prediction_grids") not in values:
        raise ConfigError("predictor kind 'file' needs files.prediction_grids")

    cloud_frame = get_str("files", "cloud_frame", SENSOR_LOCAL)
    if cloud_frame not in (SENSOR_LOCAL, WORLD):
        raise ConfigError(f"cloud_frame must be {SENSOR_LOCAL!r} or {WORLD!r}")
    file_patterns = {key: values[("files", key)][0]
                     for key in _KNOWN_KEYS["files"]
                     if ("files", key) in values and key not in ("cloud_frame", "out_dir")}
    out_dir = Path(get_str("files", "out_dir", "out"))
    if out_dir_override is not None:
        out_dir = Path(out_dir_override)
    if not out_dir.is_absolute():
        out_dir = path.parent / out_dir

    scene = None
    if "scene" in sections:
        def scene_pair(key, default):
            value, lineno = get("scene", key)
            return default if value is None else _to_floats(key, value, lineno, 2)

        def scene_triple(key, default):
            value, lineno = get("scene", key)
            return default if value is None else _to_floats(key, value, lineno, 3)

        scene = SyntheticSceneSpec(
            vehicles=get_int("scene", "vehicles", 4),
            vehicle_size=scene_triple("vehicle_size", (4.5, 2.0, 1.8)),
            speed_min=get_float("scene", "speed_min", 5.0),
            speed_max=get_float("scene", "speed_max", 15.0),
            buildings=get_int("scene", "buildings", 4),
            building_size=scene_triple("building_size", (12.0, 10.0, 15.0)),
            uav_height=get_float("scene", "uav_height", 60.0),
            uav_speed=get_float("scene", "uav_speed", 5.0),
            lidar_rings=get_int("scene", "lidar_rings", 16),
            lidar_azimuth_steps=get_int("scene", "lidar_azimuth_steps", 48),
            lidar_max_range=get_float("scene", "lidar_max_range", 300.0),
            uav_elevation_deg=scene_pair("uav_elevation_deg", (-80.0, -10.0)),
            vehicle_elevation_deg=scene_pair("vehicle_elevation_deg", (-10.0, 10.0)),
            scatterer_spacing=get_float("scene", "scatterer_spacing", 2.0))
        if scene.uav_height <= height_threshold:
            raise ConfigError("uav_height must exceed height_threshold")

    return ScenarioManifest(
        base_dir=path.parent, snapshots=snapshots, dt=dt, seed=seed,
        transform_convention=convention, roi=roi,
        height_threshold=height_threshold, h_c=h_c, r_match=r_match, rf=rf,
        stochastic=stochastic, realizations=realizations, predictor=predictor,
        baseline=baseline, cloud_frame=cloud_frame,
        file_patterns=file_patterns, out_dir=out_dir, scene=scene)


def manifest_header_lines(manifest: ScenarioManifest) -> list[str]:
    """Comment lines echoing the parameters that shaped a result file."""
    rf = manifest.rf
    return [
        f"# seed = {manifest.seed}",
        f"# snapshots = {manifest.snapshots}",
        f"# dt = {manifest.dt:.9g}",
        f"# carrier_freq_hz = {rf.carrier_freq_hz:.9g}",
        f"# bandwidth_hz = {rf.bandwidth_hz:.9g}",
        f"# chi = {rf.chi:.9g}",
        f"# ricean_omega = {rf.ricean_omega}",
        f"# eta_gr = {rf.eta_gr:.9g}",
        f"# realizations = {manifest.realizations}",
    ]
