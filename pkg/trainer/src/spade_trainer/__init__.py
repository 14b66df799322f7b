"""3D U-Net trainer mapping voxelized LiDAR features to scatterer grids."""

from .data import SamplePair, TrainConfig, load_dataset, split_indices
from .model import ScattererUNet, build_model
from .train import export_predictions, load_checkpoint, save_checkpoint, train

__version__ = "0.1.0"

__all__ = [
    "SamplePair",
    "TrainConfig",
    "ScattererUNet",
    "build_model",
    "train",
    "export_predictions",
    "save_checkpoint",
    "load_checkpoint",
    "load_dataset",
    "split_indices",
    "__version__",
]
