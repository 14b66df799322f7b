"""Voxel clusters and their temporal identity.

Every occupied voxel of a scatterer grid is one cluster whose center is the
voxel center.  Clusters below a height threshold are dynamic (moving
objects), clusters at or above it are static.  Tracking links clusters
across snapshots: same voxel index continues a track, and dynamic tracks may
re-match to a nearby voxel to follow moving objects.  Velocities come from
differencing matched cluster centers between consecutive snapshots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core import Roi, Vec3, ZERO_VEC, voxel_center
from .prediction import ScattererGrid

DYNAMIC = "dynamic"
STATIC = "static"

CLUSTER_CSV_HEADER = "time,ix,iy,iz,cx,cy,cz,count,kind,vx,vy,vz"


@dataclass(frozen=True)
class Cluster:
    voxel_index: tuple[int, int, int]
    center: Vec3
    count: int
    kind: str = STATIC
    velocity: Vec3 = ZERO_VEC

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("cluster count must be at least 1")
        if self.kind not in (DYNAMIC, STATIC):
            raise ValueError(f"unknown cluster kind {self.kind!r}")
        if self.kind == STATIC and self.velocity != ZERO_VEC:
            raise ValueError("static clusters must have zero velocity")

    def csv_row(self, time: float) -> str:
        ix, iy, iz = self.voxel_index
        c, v = self.center, self.velocity
        return (f"{time:.9g},{ix},{iy},{iz},{c.x:.9g},{c.y:.9g},{c.z:.9g},"
                f"{self.count},{self.kind},{v.x:.9g},{v.y:.9g},{v.z:.9g}")


@dataclass(frozen=True)
class ClusterSet:
    time: float
    roi: Roi
    clusters: tuple[Cluster, ...]

    def __post_init__(self):
        indices = [c.voxel_index for c in self.clusters]
        if len(set(indices)) != len(indices):
            raise ValueError("cluster voxel indices must be unique within a set")
        object.__setattr__(self, "clusters", tuple(self.clusters))

    def __len__(self) -> int:
        return len(self.clusters)

    @property
    def total_scatterers(self) -> int:
        return sum(c.count for c in self.clusters)


@dataclass
class ClusterTrack:
    """Per-snapshot states of one cluster identity."""

    track_id: int
    times: list[float] = field(default_factory=list)
    states: list[Cluster] = field(default_factory=list)

    @property
    def t_birth(self) -> float:
        return self.times[0]

    @property
    def t_death(self) -> float:
        return self.times[-1]

    @property
    def kind(self) -> str:
        return self.states[0].kind

    def state_at(self, t: float, tol: float = 1e-9) -> Cluster | None:
        for tt, state in zip(self.times, self.states):
            if abs(tt - t) <= tol:
                return state
        return None

    def is_newborn_at(self, t: float, tol: float = 1e-9) -> bool:
        return abs(self.t_birth - t) <= tol


def extract_clusters(grid: ScattererGrid, time: float) -> ClusterSet:
    """One cluster per occupied voxel; scatterer totals are conserved."""
    occupied = np.argwhere(grid.counts > 0)
    clusters = []
    for ix, iy, iz in occupied:
        index = (int(ix), int(iy), int(iz))
        clusters.append(Cluster(index, voxel_center(grid.roi, index),
                                int(grid.counts[index])))
    return ClusterSet(time, grid.roi, tuple(clusters))


def classify(cluster_set: ClusterSet, h_c: float) -> ClusterSet:
    """Split clusters by center height: below h_c dynamic, otherwise static.

    Equality counts as static (the conservative zero-velocity choice), and
    the label applies to every scatterer inside the cluster.
    """
    if not math.isfinite(h_c):
        raise ValueError("h_c must be finite")
    labelled = tuple(
        replace(c, kind=DYNAMIC if c.center.z < h_c else STATIC, velocity=ZERO_VEC)
        for c in cluster_set.clusters)
    return ClusterSet(cluster_set.time, cluster_set.roi, labelled)


def estimate_velocity(track: ClusterTrack, t: float, dt: float) -> Vec3:
    """Velocity of a track at time t from matched-center differencing.

    Static tracks always report zero.  A dynamic track with no matched state
    one step earlier (a newborn) also reports zero.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    state = track.state_at(t)
    if state is None:
        raise ValueError(f"track {track.track_id} has no state at t={t}")
    if state.kind == STATIC:
        return ZERO_VEC
    prev = track.state_at(t - dt)
    if prev is None:
        return ZERO_VEC
    return (state.center - prev.center).scaled(1.0 / dt)


def track(sets: Sequence[ClusterSet], r_match: float | None = None) -> list[ClusterTrack]:
    """Link cluster sets over time into tracks.

    Same occupied voxel in consecutive snapshots continues a track; a voxel
    going empty ends one; a newly occupied voxel starts one.  Unmatched
    dynamic clusters may continue the nearest unmatched dynamic track whose
    last center lies within r_match (default: one voxel diagonal).
    Matching is deterministic: clusters are visited in voxel-index order and
    distance ties keep the lowest track id.
    """
    sets = list(sets)
    if not sets:
        return []
    if r_match is None:
        r_match = sets[0].roi.voxel_diagonal
    tracks: list[ClusterTrack] = []
    active: dict[int, tuple[int, int, int]] = {}  # track_id -> last voxel index
    next_id = 0
    prev_time: float | None = None

    for cluster_set in sets:
        t = cluster_set.time
        dt = None if prev_time is None else t - prev_time
        by_voxel = {tid: vox for tid, vox in active.items()}
        voxel_to_track = {vox: tid for tid, vox in by_voxel.items()}
        matched_tracks: set[int] = set()
        assignments: list[tuple[Cluster, int | None]] = []

        ordered = sorted(cluster_set.clusters, key=lambda c: c.voxel_index)
        leftovers = []
        for cluster in ordered:
            tid = voxel_to_track.get(cluster.voxel_index)
            if tid is not None and tid not in matched_tracks:
                assignments.append((cluster, tid))
                matched_tracks.add(tid)
            else:
                leftovers.append(cluster)

        # dynamic re-matching across neighboring voxels
        for cluster in leftovers:
            best: tuple[float, int] | None = None
            if cluster.kind == DYNAMIC:
                for tid, vox in by_voxel.items():
                    if tid in matched_tracks or tracks[tid].kind != DYNAMIC:
                        continue
                    last = tracks[tid].states[-1]
                    dist = (cluster.center - last.center).norm()
                    if dist <= r_match and (best is None or (dist, tid) < best):
                        best = (dist, tid)
            if best is not None:
                assignments.append((cluster, best[1]))
                matched_tracks.add(best[1])
            else:
                assignments.append((cluster, None))

        new_active: dict[int, tuple[int, int, int]] = {}
        for cluster, tid in assignments:
            if tid is None:
                tid = next_id
                next_id += 1
                tracks.append(ClusterTrack(tid))
            trk = tracks[tid]
            if cluster.kind == DYNAMIC and trk.states and dt is not None:
                velocity = (cluster.center - trk.states[-1].center).scaled(1.0 / dt)
                cluster = replace(cluster, velocity=velocity)
            trk.times.append(t)
            trk.states.append(cluster)
            new_active[tid] = cluster.voxel_index
        active = new_active
        prev_time = t

    return tracks


def sets_from_tracks(tracks: Sequence[ClusterTrack], times: Sequence[float],
                     roi: Roi) -> list[ClusterSet]:
    """Rebuild per-time cluster sets (with tracked velocities) from tracks."""
    out = []
    for t in times:
        clusters = []
        for trk in tracks:
            state = trk.state_at(t)
            if state is not None:
                clusters.append(state)
        out.append(ClusterSet(t, roi, tuple(clusters)))
    return out


def write_cluster_csv(path, sets: Sequence[ClusterSet]) -> None:
    lines = [CLUSTER_CSV_HEADER]
    for cluster_set in sets:
        for cluster in sorted(cluster_set.clusters, key=lambda c: c.voxel_index):
            lines.append(cluster.csv_row(cluster_set.time))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
