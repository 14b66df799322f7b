"""Point-cloud pipeline: sensor-frame transforms, registration, ROI and
height filtering, voxelization, and the three-channel environment feature
grid (point density plus voxel-center distances to Tx and Rx).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Pose, Roi, Vec3, VoxelGrid

SENSOR_LOCAL = "sensor-local"
WORLD = "world"

#: Sensor-to-world transform conventions.  "paper" applies
#:   x = x_s - x_l cos(t) + y_l sin(t)
#:   y = y_s - y_l cos(t) + x_l sin(t)
#:   z = z_s - z_l
#: which is orthogonal only for headings that are multiples of pi/2;
#: "conventional" is the standard rigid rotation plus translation.
CONVENTIONS = ("paper", "conventional")


@dataclass(frozen=True)
class PointCloud:
    frame: str
    points: np.ndarray = field(repr=False)  # (n, 3) m

    def __post_init__(self):
        if self.frame not in (SENSOR_LOCAL, WORLD):
            raise ValueError(f"unknown frame {self.frame!r}")
        points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if not np.isfinite(points).all():
            raise ValueError("point cloud contains non-finite coordinates")
        points = np.ascontiguousarray(points)
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    def __len__(self) -> int:
        return int(self.points.shape[0])


@dataclass(frozen=True)
class FilterConfig:
    roi: Roi
    height_threshold: float  # m, points below are discarded

    def __post_init__(self):
        if not math.isfinite(self.height_threshold):
            raise ValueError("height_threshold must be finite")


def _check_convention(convention: str):
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown transform convention {convention!r}")


def to_world(cloud: PointCloud, sensor_pose: Pose, convention: str = "paper") -> PointCloud:
    """Map a sensor-local cloud into world coordinates at the given pose."""
    _check_convention(convention)
    if cloud.frame != SENSOR_LOCAL:
        raise ValueError(f"to_world expects a {SENSOR_LOCAL} cloud, got {cloud.frame}")
    xl, yl, zl = cloud.points[:, 0], cloud.points[:, 1], cloud.points[:, 2]
    s = sensor_pose.position
    c, sn = math.cos(sensor_pose.heading), math.sin(sensor_pose.heading)
    if convention == "paper":
        world = np.column_stack([s.x - xl * c + yl * sn,
                                 s.y - yl * c + xl * sn,
                                 s.z - zl])
    else:
        world = np.column_stack([s.x + xl * c - yl * sn,
                                 s.y + xl * sn + yl * c,
                                 s.z + zl])
    return PointCloud(WORLD, world)


def from_world(cloud: PointCloud, sensor_pose: Pose, convention: str = "paper") -> PointCloud:
    """Inverse of :func:`to_world`; used when writing synthetic sensor files.

    The paper-form transform is singular at headings where cos(2t) = 0 and
    cannot be inverted there.
    """
    _check_convention(convention)
    if cloud.frame != WORLD:
        raise ValueError(f"from_world expects a {WORLD} cloud, got {cloud.frame}")
    s = sensor_pose.position
    c, sn = math.cos(sensor_pose.heading), math.sin(sensor_pose.heading)
    dx = cloud.points[:, 0] - s.x
    dy = cloud.points[:, 1] - s.y
    dz = cloud.points[:, 2] - s.z
    if convention == "paper":
        det = c * c - sn * sn  # cos(2t)
        if abs(det) < 1e-9:
            raise ValueError("paper transform is singular at this heading; "
                             "use the conventional transform")
        # invert [[-c, s], [s, -c]]
        xl = (-c * dx - sn * dy) / det
        yl = (-sn * dx - c * dy) / det
        local = np.column_stack([xl, yl, -dz])
    else:
        local = np.column_stack([c * dx + sn * dy,
                                 -sn * dx + c * dy,
                                 dz])
    return PointCloud(SENSOR_LOCAL, local)


def register(tx_cloud: PointCloud, rx_cloud: PointCloud) -> PointCloud:
    """Merge two world-frame clouds; duplicates are kept (multiset union)."""
    for cloud, name in ((tx_cloud, "tx"), (rx_cloud, "rx")):
        if cloud.frame != WORLD:
            raise ValueError(f"register expects world-frame clouds, "
                             f"{name} cloud is {cloud.frame}")
    return PointCloud(WORLD, np.vstack([tx_cloud.points, rx_cloud.points]))


def filter_valid(cloud: PointCloud, cfg: FilterConfig) -> PointCloud:
    """Keep points inside the half-open ROI and at or above the height threshold."""
    if cloud.frame != WORLD:
        raise ValueError("filter_valid expects a world-frame cloud")
    keep = cfg.roi.contains_points(cloud.points)
    keep &= cloud.points[:, 2] >= cfg.height_threshold
    return PointCloud(WORLD, cloud.points[keep])


def voxelize_counts(cloud: PointCloud, roi: Roi) -> VoxelGrid:
    """Per-voxel point counts as a single-channel grid.

    All points must already lie inside the ROI (apply filter_valid first).
    """
    if cloud.frame != WORLD:
        raise ValueError("voxelize_counts expects a world-frame cloud")
    if not roi.contains_points(cloud.points).all():
        raise ValueError("voxelize_counts received points outside the ROI; "
                         "filter_valid must run first")
    counts = np.zeros(roi.dims, dtype=float)
    if len(cloud):
        idx = roi.voxel_indices(cloud.points)
        np.add.at(counts, (idx[:, 0], idx[:, 1], idx[:, 2]), 1.0)
    return VoxelGrid(roi, counts[None, ...])


def distance_features(roi: Roi, tx_pos: Vec3, rx_pos: Vec3) -> VoxelGrid:
    """Two channels: Euclidean distance from each voxel center to Tx and Rx."""
    gx, gy, gz = roi.center_grids()

    def dist(p: Vec3) -> np.ndarray:
        return np.sqrt((gx - p.x) ** 2 + (gy - p.y) ** 2 + (gz - p.z) ** 2)

    return VoxelGrid(roi, np.stack([dist(tx_pos), dist(rx_pos)]))


@dataclass(frozen=True)
class Snapshot:
    """Raw per-snapshot sensor inputs: local-frame clouds plus sensor poses."""

    tx_cloud: PointCloud
    rx_cloud: PointCloud
    tx_pose: Pose
    rx_pose: Pose


def build_feature_grid(snapshot: Snapshot, cfg: FilterConfig,
                       convention: str = "paper") -> VoxelGrid:
    """Three-channel environment features: [density, D_Tx, D_Rx]."""
    tx_world = to_world(snapshot.tx_cloud, snapshot.tx_pose, convention)
    rx_world = to_world(snapshot.rx_cloud, snapshot.rx_pose, convention)
    valid = filter_valid(register(tx_world, rx_world), cfg)
    density = voxelize_counts(valid, cfg.roi)
    dists = distance_features(cfg.roi, snapshot.tx_pose.position,
                              snapshot.rx_pose.position)
    return VoxelGrid(cfg.roi, np.concatenate([density.values, dists.values]))
