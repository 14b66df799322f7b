"""Volumetric encoder-decoder for per-voxel scatterer-count regression.

Two pooling stages (spatial dims must be divisible by four), skip
connections, and a Softplus head so predicted counts are non-negative.
"""

from __future__ import annotations

import torch
from torch import nn


class DoubleConv(nn.Module):
    """Two 3x3x3 convolutions, each followed by batch norm and ReLU."""

    def __init__(self, c_in: int, c_out: int):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv3d(c_in, c_out, kernel_size=3, padding=1),
            nn.BatchNorm3d(c_out),
            nn.ReLU(inplace=True),
            nn.Conv3d(c_out, c_out, kernel_size=3, padding=1),
            nn.BatchNorm3d(c_out),
            nn.ReLU(inplace=True),
        )

    def forward(self, x):
        return self.block(x)


class ScattererUNet(nn.Module):
    """3D U-Net: depth-2 encoder, mirrored decoder, 1x1x1 Softplus head."""

    DEPTH = 2

    def __init__(self, in_channels: int = 3, out_channels: int = 1,
                 base_width: int = 32):
        super().__init__()
        w = base_width
        self.enc1 = DoubleConv(in_channels, w)
        self.enc2 = DoubleConv(w, 2 * w)
        self.pool = nn.MaxPool3d(kernel_size=2)
        self.bottleneck = DoubleConv(2 * w, 4 * w)
        self.up2 = nn.ConvTranspose3d(4 * w, 2 * w, kernel_size=2, stride=2)
        self.dec2 = DoubleConv(4 * w, 2 * w)
        self.up1 = nn.ConvTranspose3d(2 * w, w, kernel_size=2, stride=2)
        self.dec1 = DoubleConv(2 * w, w)
        self.head = nn.Conv3d(w, out_channels, kernel_size=1)
        self.activation = nn.Softplus()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        divisor = 2 ** self.DEPTH
        if any(d % divisor for d in x.shape[-3:]):
            raise ValueError(f"spatial dims {tuple(x.shape[-3:])} must be "
                             f"divisible by {divisor}")
        z1 = self.enc1(x)
        z2 = self.enc2(self.pool(z1))
        bottom = self.bottleneck(self.pool(z2))
        d2 = self.dec2(torch.cat([self.up2(bottom), z2], dim=1))
        d1 = self.dec1(torch.cat([self.up1(d2), z1], dim=1))
        return self.activation(self.head(d1))


def build_model(in_channels: int = 3, out_channels: int = 1,
                base_width: int = 32) -> ScattererUNet:
    return ScattererUNet(in_channels, out_channels, base_width)
