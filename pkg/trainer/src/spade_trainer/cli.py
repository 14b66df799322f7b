"""spade-train command line: train on a VXG dataset directory and export
checkpoint, loss curve, and per-sample prediction grids."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .data import TrainConfig, load_dataset, split_indices
from .model import build_model
from .train import export_predictions, save_checkpoint, train, write_loss_curve
from .vxg import VxgError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spade-train",
        description="train the 3D U-Net scatterer-count predictor on VXG "
                    "feature/truth grids")
    parser.add_argument("--data", required=True,
                        help="dataset directory with features/ and truth/")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--epochs", type=int, default=120)
    parser.add_argument("--batch", type=int, default=4)
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--width", type=int, default=32,
                        help="base channel width of the encoder")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    cfg = TrainConfig(batch_size=args.batch, learning_rate=args.lr,
                      epochs=args.epochs, seed=args.seed,
                      base_width=args.width)
    try:
        samples = load_dataset(args.data)
    except (VxgError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 1

    split = split_indices(len(samples), cfg.seed)
    train_split = [samples[i] for i in split["train"]]
    val_split = [samples[i] for i in split["val"]]
    if not train_split:  # tiny datasets: train on everything
        train_split, val_split = samples, []

    model = build_model(base_width=cfg.base_width)
    result = train(model, train_split, cfg, val_samples=val_split or None)

    out = Path(args.out)
    save_checkpoint(result, cfg, out / "checkpoint.pt")
    write_loss_curve(result, out / "loss_curve.csv")
    model.load_state_dict(result.best_state)
    paths = export_predictions(model, samples, out / "predictions")
    last = result.history[-1] if result.history else {}
    print(f"trained {result.steps} steps, final train mse "
          f"{last.get('train_mse', float('nan')):.4g}, "
          f"val mse {last.get('val_mse', float('nan')):.4g}")
    print(f"wrote checkpoint and {len(paths)} prediction grids under {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
