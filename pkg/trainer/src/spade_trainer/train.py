"""Training loop: Adam on voxelwise MSE, best-validation checkpointing.

Deterministic for a given seed up to backend nondeterminism (PyTorch CPU
kernels are deterministic in practice; GPU kernels may not be).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .data import SamplePair, TrainConfig
from .model import ScattererUNet, build_model


@dataclass
class TrainResult:
    model: ScattererUNet
    best_state: dict
    history: list[dict] = field(default_factory=list)  # per-epoch losses
    steps: int = 0

    @property
    def final_train_mse(self) -> float:
        return self.history[-1]["train_mse"] if self.history else float("nan")


def _to_tensors(samples: list[SamplePair]):
    x = torch.from_numpy(np.stack([s.features for s in samples])).float()
    y = torch.from_numpy(np.stack([s.target for s in samples])).float()
    return x, y


def _mse(model: nn.Module, x: torch.Tensor, y: torch.Tensor,
         batch_size: int) -> float:
    model.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, x.shape[0], batch_size):
            xb = x[start:start + batch_size]
            yb = y[start:start + batch_size]
            total += float(nn.functional.mse_loss(model(xb), yb,
                                                  reduction="sum"))
            count += yb.numel()
    return total / count


def train(model: ScattererUNet, train_samples: list[SamplePair],
          cfg: TrainConfig, val_samples: list[SamplePair] | None = None,
          max_steps: int | None = None,
          stop_at_train_mse: float | None = None) -> TrainResult:
    """Optimize voxelwise MSE; keep the state with the best validation loss
    (train loss when no validation split is given)."""
    if not train_samples:
        raise ValueError("training split is empty")
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    x_train, y_train = _to_tensors(train_samples)
    x_val, y_val = _to_tensors(val_samples) if val_samples else (None, None)

    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    loss_fn = nn.MSELoss()
    result = TrainResult(model, copy.deepcopy(model.state_dict()))
    best_val = float("inf")
    n = x_train.shape[0]

    for epoch in range(cfg.epochs):
        model.train()
        order = rng.permutation(n)
        epoch_loss, seen = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb, yb = x_train[idx], y_train[idx]
            optimizer.zero_grad()
            loss = loss_fn(model(xb), yb)
            loss.backward()
            optimizer.step()
            epoch_loss += float(loss.detach()) * len(idx)
            seen += len(idx)
            result.steps += 1
            if max_steps is not None and result.steps >= max_steps:
                break
        train_mse = _mse(model, x_train, y_train, cfg.batch_size)
        record = {"epoch": epoch, "train_mse": train_mse,
                  "batch_mse": epoch_loss / max(seen, 1)}
        if x_val is not None:
            record["val_mse"] = _mse(model, x_val, y_val, cfg.batch_size)
        result.history.append(record)
        monitored = record.get("val_mse", train_mse)
        if monitored < best_val:
            best_val = monitored
            result.best_state = copy.deepcopy(model.state_dict())
        if stop_at_train_mse is not None and train_mse < stop_at_train_mse:
            break
        if max_steps is not None and result.steps >= max_steps:
            break
    return result


def save_checkpoint(result: TrainResult, cfg: TrainConfig, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save({"state_dict": result.best_state,
                "base_width": cfg.base_width,
                "history": result.history}, path)


def load_checkpoint(path) -> ScattererUNet:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    model = build_model(base_width=payload["base_width"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model


def write_loss_curve(result: TrainResult, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["epoch,train_mse,val_mse"]
    for record in result.history:
        val = record.get("val_mse", float("nan"))
        lines.append(f"{record['epoch']},{record['train_mse']:.9g},{val:.9g}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_predictions(model: ScattererUNet, samples: list[SamplePair],
                       out_dir) -> list[Path]:
    """One single-channel VXG per sample, in input order."""
    from .vxg import write_vxg

    out_dir = Path(out_dir)
    model.eval()
    paths = []
    with torch.no_grad():
        for k, sample in enumerate(samples):
            x = torch.from_numpy(sample.features[None]).float()
            pred = model(x)[0].numpy()
            path = out_dir / f"pred_{k:04d}.vxg"
            write_vxg(path, pred, sample.bounds)
            paths.append(path)
    return paths
