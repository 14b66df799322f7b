"""Shared geometric and scenario domain types.

Positions are metric world coordinates, headings are radians measured from
the x-axis, frequencies are Hz.  All types are immutable value objects and
safe to share across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact by SI definition


def wavelength(carrier_freq_hz: float) -> float:
    """Carrier wavelength c / f_c in meters."""
    if not carrier_freq_hz > 0.0:
        raise ValueError(f"carrier frequency must be positive, got {carrier_freq_hz}")
    return SPEED_OF_LIGHT / carrier_freq_hz


def normalize_heading(theta: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class Vec3:
    """3D vector in meters (or m/s when used as a velocity)."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for v in (self.x, self.y, self.z):
            if not math.isfinite(v):
                raise ValueError(f"non-finite component in {(self.x, self.y, self.z)}")

    @classmethod
    def from_array(cls, a) -> "Vec3":
        a = np.asarray(a, dtype=float).reshape(3)
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, k: float) -> "Vec3":
        return Vec3(k * self.x, k * self.y, k * self.z)

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))


ZERO_VEC = Vec3(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Pose:
    """Platform position plus heading angle w.r.t. the x-axis.

    The heading is normalized to [-pi, pi) at construction.
    """

    position: Vec3
    heading: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.heading):
            raise ValueError("heading must be finite")
        object.__setattr__(self, "heading", normalize_heading(self.heading))


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered platform samples: position, heading, velocity.

    Sample times are strictly increasing and uniformly spaced within one
    scenario.  Queries between samples interpolate position linearly and
    hold velocity and heading constant from the preceding sample.
    """

    times: np.ndarray        # (n,) s
    positions: np.ndarray    # (n, 3) m
    headings: np.ndarray     # (n,) rad
    velocities: np.ndarray   # (n, 3) m/s

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        positions = np.asarray(self.positions, dtype=float)
        headings = np.asarray(self.headings, dtype=float)
        velocities = np.asarray(self.velocities, dtype=float)
        if times.ndim != 1 or times.size < 1:
            raise ValueError("trajectory needs at least one sample")
        n = times.size
        if positions.shape != (n, 3) or velocities.shape != (n, 3) or headings.shape != (n,):
            raise ValueError("trajectory arrays have inconsistent shapes")
        if not (np.isfinite(times).all() and np.isfinite(positions).all()
                and np.isfinite(headings).all() and np.isfinite(velocities).all()):
            raise ValueError("trajectory arrays must be finite")
        if n > 1:
            dt = np.diff(times)
            if not (dt > 0).all():
                raise ValueError("trajectory times must be strictly increasing")
            if not np.allclose(dt, dt[0], rtol=1e-6, atol=1e-12):
                raise ValueError("trajectory times must be uniformly spaced")
        for name, arr in (("times", times), ("positions", positions),
                          ("headings", headings), ("velocities", velocities)):
            arr = np.ascontiguousarray(arr)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_samples(cls, samples) -> "Trajectory":
        """Build from an ordered sequence of (time, Pose, Vec3 velocity)."""
        times = np.array([s[0] for s in samples], dtype=float)
        positions = np.array([s[1].position.as_array() for s in samples])
        headings = np.array([s[1].heading for s in samples], dtype=float)
        velocities = np.array([s[2].as_array() for s in samples])
        return cls(times, positions, headings, velocities)

    @classmethod
    def constant_velocity(cls, start: Vec3, velocity: Vec3, times,
                          heading: float = 0.0) -> "Trajectory":
        times = np.asarray(times, dtype=float)
        offsets = (times - times[0])[:, None] * velocity.as_array()[None, :]
        positions = start.as_array()[None, :] + offsets
        headings = np.full(times.size, normalize_heading(heading))
        velocities = np.tile(velocity.as_array(), (times.size, 1))
        return cls(times, positions, headings, velocities)

    @property
    def start_time(self) -> float:
        return float(self.times[0])

    @property
    def end_time(self) -> float:
        return float(self.times[-1])

    def contains(self, t: float, tol: float = 1e-9) -> bool:
        return self.start_time - tol <= t <= self.end_time + tol

    def _check(self, t: float):
        if not self.contains(t):
            raise ValueError(f"time {t} outside trajectory span "
                             f"[{self.start_time}, {self.end_time}]")

    def position_at(self, t: float) -> Vec3:
        self._check(t)
        x = np.interp(t, self.times, self.positions[:, 0])
        y = np.interp(t, self.times, self.positions[:, 1])
        z = np.interp(t, self.times, self.positions[:, 2])
        return Vec3(float(x), float(y), float(z))

    def _zoh_index(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t + 1e-12, side="right") - 1)
        return min(max(i, 0), self.times.size - 1)

    def velocity_at(self, t: float) -> Vec3:
        self._check(t)
        return Vec3.from_array(self.velocities[self._zoh_index(t)])

    def heading_at(self, t: float) -> float:
        self._check(t)
        return float(self.headings[self._zoh_index(t)])

    def pose_at(self, t: float) -> Pose:
        return Pose(self.position_at(t), self.heading_at(t))


@dataclass(frozen=True)
class Roi:
    """Axis-aligned region of interest partitioned into a regular voxel grid.

    Voxel intervals are half-open [min, max) per axis so that every interior
    point maps to exactly one voxel index.
    """

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    z_min: float
    z_max: float
    g_x: int
    g_y: int
    g_z: int

    def __post_init__(self):
        for lo, hi, axis in ((self.x_min, self.x_max, "x"),
                             (self.y_min, self.y_max, "y"),
                             (self.z_min, self.z_max, "z")):
            if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
                raise ValueError(f"invalid {axis} bounds [{lo}, {hi}]")
        for g, axis in ((self.g_x, "x"), (self.g_y, "y"), (self.g_z, "z")):
            if int(g) != g or g < 1:
                raise ValueError(f"grid dimension g_{axis} must be a positive integer")

    @property
    def mins(self) -> np.ndarray:
        return np.array([self.x_min, self.y_min, self.z_min])

    @property
    def maxs(self) -> np.ndarray:
        return np.array([self.x_max, self.y_max, self.z_max])

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.g_x, self.g_y, self.g_z)

    @property
    def edge_lengths(self) -> np.ndarray:
        """Voxel edge lengths (span divided by grid dimension) per axis."""
        return (self.maxs - self.mins) / np.array(self.dims, dtype=float)

    @property
    def voxel_diagonal(self) -> float:
        return float(np.linalg.norm(self.edge_lengths))

    @property
    def n_voxels(self) -> int:
        return self.g_x * self.g_y * self.g_z

    def axis_centers(self, axis: int) -> np.ndarray:
        lo = self.mins[axis]
        edge = self.edge_lengths[axis]
        g = self.dims[axis]
        return lo + (np.arange(g) + 0.5) * edge

    def center_grids(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Voxel-center coordinates broadcast to the grid shape."""
        cx, cy, cz = (self.axis_centers(a) for a in range(3))
        return np.meshgrid(cx, cy, cz, indexing="ij")

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        """Half-open membership mask for an (n, 3) point array."""
        points = np.asarray(points, dtype=float)
        ge = (points >= self.mins).all(axis=1)
        lt = (points < self.maxs).all(axis=1)
        return ge & lt

    def voxel_indices(self, points: np.ndarray) -> np.ndarray:
        """Map (n, 3) in-ROI points to integer voxel indices by flooring."""
        points = np.asarray(points, dtype=float)
        return np.floor((points - self.mins) / self.edge_lengths).astype(np.int64)

    def approx_equal(self, other: "Roi", tol: float = 1e-9) -> bool:
        return (self.dims == other.dims
                and np.allclose(self.mins, other.mins, atol=tol, rtol=0.0)
                and np.allclose(self.maxs, other.maxs, atol=tol, rtol=0.0))


def voxel_center(roi: Roi, index) -> Vec3:
    """Geometric center of the voxel at integer index (ix, iy, iz)."""
    ix, iy, iz = index
    for i, g in zip((ix, iy, iz), roi.dims):
        if not 0 <= i < g:
            raise IndexError(f"voxel index {index} out of range for grid {roi.dims}")
    edge = roi.edge_lengths
    mins = roi.mins
    return Vec3(float(mins[0] + (ix + 0.5) * edge[0]),
                float(mins[1] + (iy + 0.5) * edge[1]),
                float(mins[2] + (iz + 0.5) * edge[2]))


@dataclass(frozen=True)
class VoxelGrid:
    """Dense multi-channel grid of per-voxel values over an ROI."""

    roi: Roi
    values: np.ndarray = field(repr=False)  # (channels, g_x, g_y, g_z)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 4:
            raise ValueError(f"grid values must be 4D, got shape {values.shape}")
        if values.shape[1:] != self.roi.dims:
            raise ValueError(f"grid shape {values.shape[1:]} does not match "
                             f"ROI dims {self.roi.dims}")
        if values.shape[0] < 1:
            raise ValueError("grid needs at least one channel")
        if not np.isfinite(values).all():
            raise ValueError("grid values must be finite")
        values = np.ascontiguousarray(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def channels(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class RfConfig:
    """RF and mixing parameters of the channel model.

    eta_gr is the ground-reflection power ratio; the cluster-path ratio is
    derived as 1 - eta_gr.  ricean_omega may be a non-negative number or
    "auto", in which case the ratio of direct-path power to total diffuse
    power is used at each snapshot.
    """

    carrier_freq_hz: float
    bandwidth_hz: float
    chi: float = 0.0
    ricean_omega: float | str = 1.0
    eta_gr: float = 0.2
    window: tuple[float, float] = (0.0, math.inf)
    wavelength_m: float | None = None

    def __post_init__(self):
        if not self.carrier_freq_hz > 0:
            raise ConfigError("carrier_freq_hz must be positive")
        if not self.bandwidth_hz > 0:
            raise ConfigError("bandwidth_hz must be positive")
        if not math.isfinite(self.chi):
            raise ConfigError("chi must be finite")
        if isinstance(self.ricean_omega, str):
            if self.ricean_omega != "auto":
                raise ConfigError(f"ricean_omega must be a number or 'auto', "
                                  f"got {self.ricean_omega!r}")
        elif not (math.isfinite(self.ricean_omega) and self.ricean_omega >= 0):
            raise ConfigError("ricean_omega must be non-negative")
        if not 0.0 <= self.eta_gr <= 1.0:
            raise ConfigError(f"eta_gr must lie in [0, 1], got {self.eta_gr}")
        t0, t1 = self.window
        if not (math.isfinite(t0) and t1 >= t0):
            raise ConfigError(f"invalid window {self.window}")
        lam = wavelength(self.carrier_freq_hz)
        if self.wavelength_m is None:
            object.__setattr__(self, "wavelength_m", lam)
        elif abs(self.wavelength_m * self.carrier_freq_hz - SPEED_OF_LIGHT) > 1e-6 * SPEED_OF_LIGHT:
            raise ConfigError("wavelength_m inconsistent with carrier_freq_hz")

    @property
    def eta_nlos(self) -> float:
        return 1.0 - self.eta_gr
