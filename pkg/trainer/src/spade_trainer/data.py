"""Sample loading and the deterministic 3:1:1 split.

A dataset directory holds `features/*.vxg` (3-channel inputs) and
`truth/*.vxg` (1-channel non-negative targets); files pair up in sorted
order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .vxg import VxgError, read_vxg


@dataclass(frozen=True)
class SamplePair:
    features: np.ndarray   # (3, gx, gy, gz)
    target: np.ndarray     # (1, gx, gy, gz), >= 0
    bounds: tuple
    name: str

    def __post_init__(self):
        if self.features.ndim != 4 or self.features.shape[0] != 3:
            raise VxgError(f"{self.name}: features must be (3, gx, gy, gz), "
                           f"got {self.features.shape}")
        if self.target.shape != (1, *self.features.shape[1:]):
            raise VxgError(f"{self.name}: target shape {self.target.shape} does "
                           f"not match features {self.features.shape}")
        if (self.target < 0).any():
            raise VxgError(f"{self.name}: target counts must be non-negative")


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 4
    learning_rate: float = 1e-3
    epochs: int = 120
    seed: int = 0
    base_width: int = 32

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 0 or self.base_width < 1:
            raise ValueError("batch_size and base_width must be positive, "
                             "epochs non-negative")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be non-negative")


def load_dataset(data_dir) -> list[SamplePair]:
    data_dir = Path(data_dir)
    feature_files = sorted((data_dir / "features").glob("*.vxg"))
    target_files = sorted((data_dir / "truth").glob("*.vxg"))
    if not feature_files:
        raise VxgError(f"no feature grids under {data_dir / 'features'}")
    if len(feature_files) != len(target_files):
        raise VxgError(f"{len(feature_files)} feature grids but "
                       f"{len(target_files)} truth grids")
    pairs = []
    for f_path, t_path in zip(feature_files, target_files):
        features, bounds = read_vxg(f_path)
        target, t_bounds = read_vxg(t_path)
        if not np.allclose(bounds, t_bounds, atol=1e-9):
            raise VxgError(f"{f_path.name}/{t_path.name}: bounds differ")
        pairs.append(SamplePair(features, target, bounds, f_path.stem))
    return pairs


def split_indices(n: int, seed: int) -> dict[str, list[int]]:
    """3:1:1 train/validation/test split, exact on multiples of five.

    Matches the simulator's split: indices ordered by blake2b(seed:index)
    and cut at 3/5 and 4/5.
    """
    def digest(i: int) -> str:
        return hashlib.blake2b(f"{seed}:{i}".encode(), digest_size=8).hexdigest()

    order = sorted(range(n), key=lambda i: (digest(i), i))
    n_train = (3 * n) // 5
    n_val = (n - n_train) // 2
    return {"train": sorted(order[:n_train]),
            "val": sorted(order[n_train:n_train + n_val]),
            "test": sorted(order[n_train + n_val:])}
