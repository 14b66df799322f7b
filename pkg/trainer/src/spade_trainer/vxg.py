"""Minimal VXG grid file I/O (the wire format shared with the simulator).

Layout, little-endian: magic "VXG1"; u32 x4 channels, g_x, g_y, g_z;
f64 x6 x/y/z min/max; then f32 values in C index order.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"VXG1"
_HEADER = struct.Struct("<4I6d")


class VxgError(ValueError):
    pass


def write_vxg(path, values: np.ndarray, bounds) -> None:
    """values: (channels, g_x, g_y, g_z); bounds: 6 floats x/y/z min/max."""
    values = np.asarray(values)
    if values.ndim != 4:
        raise VxgError(f"expected 4D values, got shape {values.shape}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = _HEADER.pack(*values.shape, *[float(b) for b in bounds])
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(header)
        fh.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def read_vxg(path) -> tuple[np.ndarray, tuple[float, ...]]:
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < len(MAGIC) + _HEADER.size or blob[:4] != MAGIC:
        raise VxgError(f"{path}: not a VXG file")
    c, gx, gy, gz, *bounds = _HEADER.unpack_from(blob, 4)
    expected = len(MAGIC) + _HEADER.size + 4 * c * gx * gy * gz
    if len(blob) != expected:
        raise VxgError(f"{path}: truncated or oversized payload")
    values = np.frombuffer(blob, dtype="<f4", offset=len(MAGIC) + _HEADER.size)
    return values.reshape(c, gx, gy, gz).copy(), tuple(bounds)
