"""Command-line front end: ``predict`` and ``metrics``.

Exit codes follow the toolkit convention: 0 success, 1 bad data or
runtime failures (missing files, unloadable weights or backends), 2 usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backends import load_backend_factory
from .export import BridgeConfig, export_predictions, export_training_metrics

PROG = "reefeval-bridge"
DEFAULT_BACKEND = "reefbridge.backends:ultralytics_backend"


def _unit_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} outside [0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Export detector predictions and trainer metrics "
        "into evaluation-toolkit formats.",
    )
    parser.add_argument("--version", action="version", version=f"{PROG} 0.1.0")
    sub = parser.add_subparsers(dest="command", required=True)

    predict = sub.add_parser(
        "predict", help="run a detector over a directory and export predictions"
    )
    predict.add_argument("--weights", required=True, help="model weights path")
    predict.add_argument("--images", required=True, help="directory of images")
    predict.add_argument("--out", required=True, help="prediction JSONL to write")
    predict.add_argument(
        "--score-floor",
        type=_unit_float,
        default=0.0,
        help="drop detections scoring below this (default 0.0: keep all)",
    )
    predict.add_argument(
        "--nms-iou",
        type=_unit_float,
        default=0.7,
        help="NMS IoU handed to the backend (default 0.7)",
    )
    predict.add_argument(
        "--backend",
        default=DEFAULT_BACKEND,
        help=f"backend factory as module:attribute (default {DEFAULT_BACKEND})",
    )
    predict.set_defaults(func=cmd_predict)

    metrics = sub.add_parser(
        "metrics", help="extract final-epoch metrics from a trainer run directory"
    )
    metrics.add_argument("--run-dir", required=True, help="directory with results.csv")
    metrics.add_argument("--name", required=True, help="configuration name for the row")
    metrics.add_argument(
        "--dataset", default="", help="dataset label for the row (optional)"
    )
    metrics.add_argument("--out", required=True, help="JSON record to write")
    metrics.set_defaults(func=cmd_metrics)
    return parser


def cmd_predict(args) -> int:
    factory = load_backend_factory(args.backend)
    cfg = BridgeConfig(
        weights=args.weights,
        image_dir=args.images,
        out_path=args.out,
        score_floor=args.score_floor,
        nms_iou=args.nms_iou,
    )
    backend = factory(cfg.weights, cfg.nms_iou)
    summary = export_predictions(cfg, backend, backend_label=args.backend)
    print(
        f"wrote {summary.n_records} records from {summary.n_images} images "
        f"(skipped {summary.n_skipped} degenerate)"
    )
    return 0


def cmd_metrics(args) -> int:
    record = export_training_metrics(args.run_dir, args.name, args.dataset)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(json.dumps(record) + "\n", encoding="utf-8")
    print(
        f"{record['name']}: P {record['precision']:.3f} R {record['recall']:.3f} "
        f"mAP@0.5 {record['map50']:.3f} mAP@0.5:0.95 {record['map5095']:.3f}"
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, json.JSONDecodeError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
