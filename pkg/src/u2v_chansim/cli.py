"""Command-line interface.

Subcommands: preprocess, predict, evaluate, simulate, stats, synth-scene.
Exit codes: 0 success, 1 configuration error, 2 stage failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, StageError
from .manifest import parse_manifest
from .prediction import METRICS_CSV_HEADER, evaluate, load_predictions, load_truth, round_predictions


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--manifest", help="scenario manifest (INI)")
    common.add_argument("--seed", type=int, default=None,
                        help="override the manifest seed")
    common.add_argument("--out-dir", default=None,
                        help="override the manifest output directory")
    common.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for per-snapshot stages")

    parser = argparse.ArgumentParser(
        prog="u2v-chansim",
        description="UAV-to-vehicle channel simulator driven by LiDAR-derived "
                    "scatterer grids")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("preprocess", parents=[common],
                   help="build and store per-snapshot feature grids")
    sub.add_parser("predict", parents=[common],
                   help="run the configured predictor and store raw grids")
    evaluate_p = sub.add_parser("evaluate", parents=[common],
                                help="score prediction grids against truth grids")
    evaluate_p.add_argument("--pred", help="single prediction VXG file")
    evaluate_p.add_argument("--truth", help="single truth VXG file")
    evaluate_p.add_argument("--round-threshold", type=float, default=0.5)
    evaluate_p.add_argument("--header", action="store_true",
                            help="also print the CSV header line")
    sub.add_parser("simulate", parents=[common],
                   help="run the full pipeline and write all outputs")
    sub.add_parser("stats", parents=[common],
                   help="run the pipeline and write only the statistics CSVs")
    sub.add_parser("synth-scene", parents=[common],
                   help="generate a synthetic scenario at the manifest file locations")
    return parser


def _need_manifest(args):
    if not args.manifest:
        raise ConfigError(f"{args.command} needs --manifest")
    return parse_manifest(args.manifest, seed_override=args.seed,
                          out_dir_override=args.out_dir)


def _cmd_preprocess(args) -> int:
    from .pipeline import run_preprocess, write_feature_grids
    manifest = _need_manifest(args)
    features = run_preprocess(manifest, args.manifest, jobs=args.jobs)
    paths = write_feature_grids(manifest, features, manifest.out_dir)
    print(f"wrote {len(paths)} feature grids to {manifest.out_dir / 'features'}")
    return 0


def _cmd_predict(args) -> int:
    from .pipeline import run_predict, run_preprocess, write_prediction_grids
    manifest = _need_manifest(args)
    features = run_preprocess(manifest, args.manifest, jobs=args.jobs)
    predictions = run_predict(manifest, features)
    paths = write_prediction_grids(manifest, predictions, manifest.out_dir)
    print(f"wrote {len(paths)} prediction grids to {manifest.out_dir / 'predictions'}")
    return 0


def _cmd_evaluate(args) -> int:
    if args.pred or args.truth:
        if not (args.pred and args.truth):
            raise ConfigError("evaluate needs both --pred and --truth")
        for path in (args.pred, args.truth):
            if not Path(path).is_file():
                raise StageError("evaluate", f"missing file {path}")
        pred = round_predictions(load_predictions(args.pred), args.round_threshold)
        truth = load_truth(args.truth)
        report = evaluate(pred, truth)
        if args.header:
            print(METRICS_CSV_HEADER)
        print(report.csv_row(Path(args.pred).stem))
        return 0
    from .pipeline import run_evaluate, run_predict, run_preprocess
    manifest = _need_manifest(args)
    if not manifest.has_role("truth_grids"):
        raise ConfigError("manifest has no truth_grids entry to evaluate against")
    features = run_preprocess(manifest, args.manifest, jobs=args.jobs)
    predictions = run_predict(manifest, features)
    rounded = [round_predictions(g, manifest.baseline.round_threshold)
               for g in predictions]
    reports = run_evaluate(manifest, rounded)
    print(METRICS_CSV_HEADER)
    for k, report in enumerate(reports):
        print(report.csv_row(k))
    return 0


def _cmd_simulate(args, stats_only: bool = False) -> int:
    from .pipeline import run_pipeline
    manifest = _need_manifest(args)
    result = run_pipeline(manifest, args.manifest, jobs=args.jobs,
                          stats_only=stats_only)
    for path in result.outputs:
        print(f"wrote {path}")
    return 0


def _cmd_synth_scene(args) -> int:
    from .scene import synth_scene
    manifest = _need_manifest(args)
    synth_scene(manifest, seed=args.seed)
    print(f"wrote scenario files under {manifest.base_dir}")
    return 0


_COMMANDS = {
    "preprocess": _cmd_preprocess,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "simulate": _cmd_simulate,
    "stats": lambda args: _cmd_simulate(args, stats_only=True),
    "synth-scene": _cmd_synth_scene,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except StageError as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
