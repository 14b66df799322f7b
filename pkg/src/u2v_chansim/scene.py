"""Synthetic road-scene generator.

Replaces external simulators with a deterministic desk-scale scene: static
building boxes, vehicles driving along the x axis at constant speed, a UAV
transmitter above the road, and one vehicle acting as the receiver.  LiDAR
is ray-cast against the boxes and the ground plane over a fixed
azimuth/elevation lattice; ground-truth scatterers are points on box faces
with an unobstructed segment to both the Tx and the Rx (single bounce).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Pose, Roi, Trajectory, Vec3, normalize_heading
from .errors import ConfigError
from .files import write_cloud_csv, write_trajectory_csv
from .lidar import WORLD, PointCloud, from_world
from .prediction import RawPredictionGrid, ScattererGrid, store_predictions

_EPS = 1e-9


@dataclass(frozen=True)
class SyntheticSceneSpec:
    """Scene content and sensor lattice for the synthetic generator."""

    vehicles: int = 4
    vehicle_size: tuple[float, float, float] = (4.5, 2.0, 1.8)
    speed_min: float = 5.0
    speed_max: float = 15.0
    buildings: int = 4
    building_size: tuple[float, float, float] = (12.0, 10.0, 15.0)
    uav_height: float = 60.0
    uav_speed: float = 5.0
    lidar_rings: int = 16
    lidar_azimuth_steps: int = 48
    lidar_max_range: float = 300.0
    uav_elevation_deg: tuple[float, float] = (-80.0, -10.0)
    vehicle_elevation_deg: tuple[float, float] = (-10.0, 10.0)
    scatterer_spacing: float = 2.0

    def __post_init__(self):
        if self.vehicles < 0 or self.buildings < 0:
            raise ConfigError("object counts must be non-negative")
        if not self.uav_height > 0:
            raise ConfigError("uav_height must be positive")
        if self.speed_max < self.speed_min or self.speed_min < 0:
            raise ConfigError("invalid speed range")
        if self.lidar_rings < 1 or self.lidar_azimuth_steps < 1:
            raise ConfigError("lidar lattice needs at least one ray")
        if not self.scatterer_spacing > 0:
            raise ConfigError("scatterer_spacing must be positive")


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [mins, maxs]."""

    mins: np.ndarray
    maxs: np.ndarray

    def at_offset(self, offset: np.ndarray) -> "Box":
        return Box(self.mins + offset, self.maxs + offset)

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.mins + self.maxs)


def _boxes_array(boxes) -> tuple[np.ndarray, np.ndarray]:
    mins = np.array([b.mins for b in boxes]).reshape(-1, 3)
    maxs = np.array([b.maxs for b in boxes]).reshape(-1, 3)
    return mins, maxs


def ray_first_hits(origin: np.ndarray, dirs: np.ndarray, boxes,
                   max_range: float, ground_z: float | None = 0.0) -> np.ndarray:
    """First-hit points of rays from one origin; rays that miss return
    nothing.  Boxes use the slab test; an optional ground plane catches
    downward rays."""
    n = dirs.shape[0]
    t_best = np.full(n, np.inf)
    if boxes:
        mins, maxs = _boxes_array(boxes)
        safe = np.where(np.abs(dirs) < 1e-12, 1e-12, dirs)
        inv = 1.0 / safe
        t1 = (mins[None, :, :] - origin) * inv[:, None, :]
        t2 = (maxs[None, :, :] - origin) * inv[:, None, :]
        t_lo = np.minimum(t1, t2).max(axis=2)
        t_hi = np.maximum(t1, t2).min(axis=2)
        hit = (t_lo <= t_hi) & (t_hi > _EPS)
        t_near = np.where(t_lo > _EPS, t_lo, t_hi)
        t_near = np.where(hit, t_near, np.inf)
        t_best = t_near.min(axis=1)
    if ground_z is not None:
        dz = dirs[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            t_g = (ground_z - origin[2]) / dz
        t_g = np.where((dz < -1e-12) & (t_g > _EPS), t_g, np.inf)
        t_best = np.minimum(t_best, t_g)
    valid = t_best <= max_range
    return origin + t_best[valid, None] * dirs[valid]


def segments_blocked(points: np.ndarray, target: np.ndarray, boxes,
                     exclude: np.ndarray | None = None) -> np.ndarray:
    """True where the open segment point->target intersects any box.

    exclude gives, per point, one box index to skip (the face the point
    sits on)."""
    if not boxes:
        return np.zeros(points.shape[0], dtype=bool)
    mins, maxs = _boxes_array(boxes)
    d = target[None, :] - points
    safe = np.where(np.abs(d) < 1e-12, 1e-12, d)
    inv = 1.0 / safe
    t1 = (mins[None, :, :] - points[:, None, :]) * inv[:, None, :]
    t2 = (maxs[None, :, :] - points[:, None, :]) * inv[:, None, :]
    t_lo = np.minimum(t1, t2).max(axis=2)
    t_hi = np.maximum(t1, t2).min(axis=2)
    blocked = (t_lo <= t_hi) & (t_hi > 1e-6) & (t_lo < 1.0 - 1e-6)
    if exclude is not None:
        blocked[np.arange(points.shape[0]), exclude] = False
    return blocked.any(axis=1)


def box_surface_points(box: Box, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic lattice of points on all six faces, each offset
    slightly outward; returns (points, outward normals)."""
    pts = []
    normals = []
    size = box.maxs - box.mins
    for axis in range(3):
        u_axis, v_axis = [a for a in range(3) if a != axis]
        nu = max(2, int(math.ceil(size[u_axis] / spacing)) + 1)
        nv = max(2, int(math.ceil(size[v_axis] / spacing)) + 1)
        us = np.linspace(box.mins[u_axis], box.maxs[u_axis], nu)
        vs = np.linspace(box.mins[v_axis], box.maxs[v_axis], nv)
        uu, vv = np.meshgrid(us, vs, indexing="ij")
        for side, coord in ((-1.0, box.mins[axis]), (1.0, box.maxs[axis])):
            face = np.empty((uu.size, 3))
            face[:, axis] = coord + side * 1e-2
            face[:, u_axis] = uu.ravel()
            face[:, v_axis] = vv.ravel()
            pts.append(face)
            n = np.zeros((uu.size, 3))
            n[:, axis] = side
            normals.append(n)
    return np.vstack(pts), np.vstack(normals)


@dataclass(frozen=True)
class SceneObject:
    box: Box
    velocity: np.ndarray  # (3,) m/s, zero for buildings

    def box_at(self, t: float) -> Box:
        return self.box.at_offset(self.velocity * t)


@dataclass(frozen=True)
class Scene:
    objects: tuple[SceneObject, ...]
    traj_tx: Trajectory
    traj_rx: Trajectory
    rx_object_index: int
    spec: SyntheticSceneSpec

    def boxes_at(self, t: float) -> list[Box]:
        return [obj.box_at(t) for obj in self.objects]


def build_scene(spec: SyntheticSceneSpec, roi: Roi, times: np.ndarray,
                seed: int) -> Scene:
    """Lay out buildings and vehicles inside the ROI footprint."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=(seed, 0)))
    x_lo, x_hi = roi.x_min + 10.0, roi.x_max - 10.0
    objects = []

    vl, vw, vh = spec.vehicle_size
    for i in range(spec.vehicles):
        lane = (i % 2) * 2 - 1                      # alternate road sides
        y = lane * (2.0 + 2.5 * ((i // 2) % 2))
        x = float(rng.uniform(x_lo, x_hi))
        heading = 0.0 if lane > 0 else math.pi
        speed = float(rng.uniform(spec.speed_min, spec.speed_max))
        direction = np.array([math.cos(heading), math.sin(heading), 0.0])
        box = Box(np.array([x - vl / 2, y - vw / 2, 0.0]),
                  np.array([x + vl / 2, y + vw / 2, vh]))
        objects.append(SceneObject(box, speed * direction))

    bl, bw, bh = spec.building_size
    for i in range(spec.buildings):
        side = (i % 2) * 2 - 1
        y = side * (14.0 + float(rng.uniform(0, 4)))
        x = float(rng.uniform(x_lo, x_hi))
        jitter = 1.0 + float(rng.uniform(-0.2, 0.2))
        box = Box(np.array([x - bl * jitter / 2, y - bw / 2, 0.0]),
                  np.array([x + bl * jitter / 2, y + bw / 2, bh * jitter]))
        objects.append(SceneObject(box, np.zeros(3)))

    uav_start = Vec3(float(rng.uniform(x_lo, x_lo + 10.0)), 0.0, spec.uav_height)
    traj_tx = Trajectory.constant_velocity(uav_start, Vec3(spec.uav_speed, 0, 0),
                                           times, heading=0.0)

    if spec.vehicles > 0:
        rx_index = 0
        rx = objects[rx_index]
        heading = normalize_heading(math.atan2(rx.velocity[1], rx.velocity[0])) \
            if np.linalg.norm(rx.velocity) > 0 else 0.0
        center = rx.box.center
        start = Vec3(float(center[0]), float(center[1]), float(rx.box.maxs[2]) + 0.05)
        traj_rx = Trajectory.constant_velocity(start, Vec3.from_array(rx.velocity),
                                               times, heading=heading)
    else:
        # no vehicles: park the receiver at the road origin
        rx_index = -1
        traj_rx = Trajectory.constant_velocity(Vec3(0.0, 0.0, 1.8), Vec3(0, 0, 0),
                                               times, heading=0.0)
    return Scene(tuple(objects), traj_tx, traj_rx, rx_index, spec)


def _scan_directions(heading: float, elevation_deg: tuple[float, float],
                     rings: int, azimuth_steps: int) -> np.ndarray:
    elevations = np.deg2rad(np.linspace(elevation_deg[0], elevation_deg[1], rings))
    azimuths = heading + np.linspace(0.0, 2.0 * math.pi, azimuth_steps,
                                     endpoint=False)
    el, az = np.meshgrid(elevations, azimuths, indexing="ij")
    return np.column_stack([(np.cos(el) * np.cos(az)).ravel(),
                            (np.cos(el) * np.sin(az)).ravel(),
                            np.sin(el).ravel()])


def lidar_scan(scene: Scene, t: float, sensor_pose: Pose,
               elevation_deg: tuple[float, float],
               exclude_object: int | None = None) -> PointCloud:
    """World-frame first-hit cloud from one sensor pose."""
    spec = scene.spec
    boxes = [obj.box_at(t) for i, obj in enumerate(scene.objects)
             if i != exclude_object]
    dirs = _scan_directions(sensor_pose.heading, elevation_deg,
                            spec.lidar_rings, spec.lidar_azimuth_steps)
    pts = ray_first_hits(sensor_pose.position.as_array(), dirs, boxes,
                         spec.lidar_max_range)
    return PointCloud(WORLD, pts)


def ground_truth_scatterers(scene: Scene, t: float, roi: Roi) -> ScattererGrid:
    """Counts of surface points visible from both the Tx and the Rx."""
    tx = scene.traj_tx.position_at(t).as_array()
    rx = scene.traj_rx.position_at(t).as_array()
    boxes = scene.boxes_at(t)
    counts = np.zeros(roi.dims, dtype=np.int64)
    if boxes:
        pts = []
        owner = []
        for i, box in enumerate(boxes):
            face_pts, _ = box_surface_points(box, scene.spec.scatterer_spacing)
            pts.append(face_pts)
            owner.append(np.full(face_pts.shape[0], i))
        pts = np.vstack(pts)
        owner = np.concatenate(owner)
        visible = ~segments_blocked(pts, tx, boxes, exclude=owner)
        visible &= ~segments_blocked(pts, rx, boxes, exclude=owner)
        pts = pts[visible]
        inside = roi.contains_points(pts)
        idx = roi.voxel_indices(pts[inside])
        if idx.size:
            np.add.at(counts, (idx[:, 0], idx[:, 1], idx[:, 2]), 1)
    return ScattererGrid(roi, counts)


def synth_scene(manifest, seed: int | None = None) -> Scene:
    """Generate a full scenario on disk from manifest [scene] settings:
    per-snapshot clouds, both trajectories, and ground-truth grids at the
    manifest file locations.  Deterministic for a given seed."""
    if manifest.scene is None:
        raise ConfigError("manifest has no [scene] section")
    seed = manifest.seed if seed is None else seed
    spec = manifest.scene
    times = np.arange(manifest.snapshots) * manifest.dt
    scene = build_scene(spec, manifest.roi, times, seed)

    write_trajectory_csv(manifest.path_for("trajectory_tx"), scene.traj_tx)
    write_trajectory_csv(manifest.path_for("trajectory_rx"), scene.traj_rx)

    local = manifest.cloud_frame != WORLD
    for k, t in enumerate(times):
        t = float(t)
        tx_pose = scene.traj_tx.pose_at(t)
        rx_pose = scene.traj_rx.pose_at(t)
        tx_cloud = lidar_scan(scene, t, tx_pose, spec.uav_elevation_deg)
        rx_cloud = lidar_scan(scene, t, rx_pose, spec.vehicle_elevation_deg,
                              exclude_object=scene.rx_object_index
                              if scene.rx_object_index >= 0 else None)
        if local:
            tx_cloud = from_world(tx_cloud, tx_pose, manifest.transform_convention)
            rx_cloud = from_world(rx_cloud, rx_pose, manifest.transform_convention)
        write_cloud_csv(manifest.path_for("clouds_tx", k), tx_cloud)
        write_cloud_csv(manifest.path_for("clouds_rx", k), rx_cloud)

        truth = ground_truth_scatterers(scene, t, manifest.roi)
        store_predictions(RawPredictionGrid(manifest.roi,
                                            truth.counts.astype(float)),
                          manifest.path_for("truth_grids", k))
    return scene
