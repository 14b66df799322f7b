"""VXG binary voxel-grid files.

Layout (little-endian throughout):
  magic "VXG1"
  u32 x4: channels, g_x, g_y, g_z
  f64 x6: x_min, x_max, y_min, y_max, z_min, z_max
  f32 x (channels * g_x * g_y * g_z): values in C index order
      ((c * g_x + ix) * g_y + iy) * g_z + iz

Write/read round-trips are bit-exact at float32 precision.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import Roi, VoxelGrid
from .errors import FormatError

MAGIC = b"VXG1"
_HEADER = struct.Struct("<4I6d")


def write_vxg(path, grid: VoxelGrid) -> None:
    path = Path(path)
    roi = grid.roi
    header = _HEADER.pack(grid.channels, roi.g_x, roi.g_y, roi.g_z,
                          roi.x_min, roi.x_max, roi.y_min, roi.y_max,
                          roi.z_min, roi.z_max)
    payload = np.ascontiguousarray(grid.values, dtype="<f4").tobytes()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(payload)


def read_vxg(path) -> VoxelGrid:
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < len(MAGIC) + _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    if blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}")
    c, gx, gy, gz, *bounds = _HEADER.unpack_from(blob, 4)
    if min(c, gx, gy, gz) < 1:
        raise FormatError(f"{path}: nonpositive dimensions {(c, gx, gy, gz)}")
    n_values = c * gx * gy * gz
    expected = len(MAGIC) + _HEADER.size + 4 * n_values
    if len(blob) != expected:
        raise FormatError(f"{path}: payload size {len(blob)} bytes, "
                          f"expected {expected}")
    try:
        roi = Roi(bounds[0], bounds[1], bounds[2], bounds[3], bounds[4], bounds[5],
                  gx, gy, gz)
    except ValueError as exc:
        raise FormatError(f"{path}: invalid ROI bounds: {exc}") from exc
    values = np.frombuffer(blob, dtype="<f4", offset=len(MAGIC) + _HEADER.size)
    values = values.reshape(c, gx, gy, gz).astype(np.float64)
    if not np.isfinite(values).all():
        raise FormatError(f"{path}: non-finite values")
    return VoxelGrid(roi, values)
