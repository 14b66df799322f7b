"""UAV-to-vehicle channel simulator driven by LiDAR-derived scatterer grids.

Pipeline: point clouds are registered and voxelized into environment
features, a pluggable predictor estimates per-voxel scatterer counts,
occupied voxels become tracked clusters, and the cluster geometry drives a
tapped channel impulse response whose correlation statistics (TACF, FCF,
DPSD) are estimated by Monte-Carlo ensemble averaging.
"""

from .core import (
    SPEED_OF_LIGHT,
    Pose,
    RfConfig,
    Roi,
    Trajectory,
    Vec3,
    VoxelGrid,
    voxel_center,
    wavelength,
)
from .errors import ConfigError, FormatError, StageError

__version__ = "0.1.0"

__all__ = [
    "SPEED_OF_LIGHT",
    "Pose",
    "RfConfig",
    "Roi",
    "Trajectory",
    "Vec3",
    "VoxelGrid",
    "voxel_center",
    "wavelength",
    "ConfigError",
    "FormatError",
    "StageError",
    "__version__",
]
