"""CSV readers/writers for point clouds and trajectories.

Cloud files: header "x,y,z", one row per point, one file per
(snapshot, sensor).  Trajectory files: header
"t,x,y,z,heading_rad,vx,vy,vz", one row per snapshot.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .core import Trajectory
from .errors import FormatError
from .lidar import PointCloud

_FMT = "%.10g"

CLOUD_HEADER = "x,y,z"
TRAJECTORY_HEADER = "t,x,y,z,heading_rad,vx,vy,vz"


def _write_rows(path, header: str, rows: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [header]
    for row in np.atleast_2d(rows):
        lines.append(",".join(_FMT % v for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _read_rows(path, header: str, n_cols: int) -> np.ndarray:
    path = Path(path)
    text = path.read_text(encoding="utf-8").strip().splitlines()
    if not text or text[0].strip() != header:
        raise FormatError(f"{path}: expected header {header!r}")
    rows = []
    for lineno, line in enumerate(text[1:], start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != n_cols:
            raise FormatError(f"{path}:{lineno}: expected {n_cols} columns")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return np.asarray(rows, dtype=float).reshape(-1, n_cols)


def write_cloud_csv(path, cloud: PointCloud) -> None:
    _write_rows(path, CLOUD_HEADER, cloud.points.reshape(-1, 3))


def read_cloud_csv(path, frame: str) -> PointCloud:
    return PointCloud(frame, _read_rows(path, CLOUD_HEADER, 3))


def write_trajectory_csv(path, traj: Trajectory) -> None:
    rows = np.column_stack([traj.times, traj.positions, traj.headings,
                            traj.velocities])
    _write_rows(path, TRAJECTORY_HEADER, rows)


def read_trajectory_csv(path) -> Trajectory:
    rows = _read_rows(path, TRAJECTORY_HEADER, 8)
    if rows.shape[0] < 1:
        raise FormatError(f"{path}: trajectory file has no samples")
    try:
        return Trajectory(rows[:, 0], rows[:, 1:4], rows[:, 4], rows[:, 5:8])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
