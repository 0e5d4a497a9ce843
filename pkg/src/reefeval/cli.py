"""Command-line front end wiring the pipeline together.

Exit codes: 0 success, 1 domain error (unreadable or invalid data), 2 usage
error (bad flags or arguments). Numeric flags are validated up front, before
any file is touched, and all outputs are written atomically.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, curation, frames, io, report, splits
from .errors import ParseError
from .metrics import (
    INTERPOLATION_MODES,
    ApResult,
    ThresholdSweepResult,
    f1_sweep,
    map_at,
    map_range,
)
from .types import dataset_stats

PROG = "reefeval"


class UsageError(Exception):
    """A flag combination argparse cannot express on its own; exits 2."""


# ---------------------------------------------------------------------------
# flag validators (argparse type callables -> usage errors, exit 2)


def _int_at_least(minimum: int):
    def parse(text: str) -> int:
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
        if value < minimum:
            raise argparse.ArgumentTypeError(f"{value} is below the minimum {minimum}")
        return value

    return parse


def _float_at_least(minimum: float, *, exclusive: bool = False):
    def parse(text: str) -> float:
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
        if value < minimum or (exclusive and value == minimum):
            bound = "above" if exclusive else "at least"
            raise argparse.ArgumentTypeError(f"{value} is not {bound} {minimum}")
        return value

    return parse


def _iou_value(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 < value <= 1.0:
        raise argparse.ArgumentTypeError(f"IoU threshold {value} outside (0, 1]")
    return value


def _unit_value(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} outside [0, 1]")
    return value


def _ratios_value(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected three comma-separated ratios, got {text!r}"
        )
    try:
        ratios = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric ratio in {text!r}") from None
    if any(r < 0 for r in ratios):
        raise argparse.ArgumentTypeError(f"negative ratio in {text!r}")
    if abs(sum(ratios) - 1.0) > splits.RATIO_TOLERANCE:
        raise argparse.ArgumentTypeError(f"ratios {text!r} do not sum to 1")
    return ratios


def _keep_value(text: str) -> tuple[int, ...]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise argparse.ArgumentTypeError("empty keep list")
    try:
        ids = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-integer class id in {text!r}") from None
    if any(i < 0 for i in ids):
        raise argparse.ArgumentTypeError(f"negative class id in {text!r}")
    return ids


# ---------------------------------------------------------------------------
# shared helpers


def _add_dataset_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--gt", required=True, metavar="MANIFEST", help="dataset manifest (JSONL)")
    sub.add_argument(
        "--classes",
        metavar="FILE",
        help="class-map file (default: classes.txt next to the manifest)",
    )


def _load_dataset(args: argparse.Namespace):
    return io.load_dataset(args.gt, args.classes)


# ---------------------------------------------------------------------------
# subcommands


def cmd_stats(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    histogram = dataset_stats(dataset)
    print(f"images: {histogram.n_images}")
    print(f"boxes: {histogram.total}")
    for entry in histogram.entries:
        print(f"  {entry.family}: {entry.count} ({entry.share:.3f})")
    if args.out_csv:
        io.atomic_write_text(args.out_csv, report.render_family_histogram(histogram))
    if args.out_json:
        io.write_json(args.out_json, histogram.as_dict())
    return 0


def cmd_curate(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    if args.config is not None:
        curated = curation.curate_preset(dataset, args.config)
    elif args.top_k is not None:
        curated = curation.top_k_families(dataset, args.top_k)
    elif args.min_area is not None:
        curated = curation.filter_min_area(dataset, args.min_area)
    else:
        curated = curation.remap_classes(dataset, args.keep)
    out_dir = Path(args.out)
    io.save_dataset(curated.dataset, out_dir)
    io.write_json(
        out_dir / "plan.json",
        {
            "plan": curated.plan.as_dict(),
            "dropped_boxes": curated.dropped_boxes,
            "dropped_images": curated.dropped_images,
        },
    )
    print(
        f"kept {len(curated.dataset.images)} images / {curated.dataset.n_boxes} boxes"
        f" (dropped {curated.dropped_images} images, {curated.dropped_boxes} boxes)"
    )
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    result = curation.validate_annotation_rules(dataset, args.min_side)
    if args.out:
        io.write_json(args.out, result.as_dict())
    print(
        f"checked {result.n_boxes} boxes against min side {result.min_side_px:g} px: "
        f"{len(result.violations)} below threshold"
    )
    return 0


def cmd_split(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    if args.ratios is not None:
        assignment = splits.split(dataset, args.ratios, args.seed)
    else:
        assignment = splits.k_fold(dataset, args.folds, args.seed)
    io.write_json(args.out, assignment.as_dict())
    print(f"assigned {len(assignment.partition)} images")
    return 0


def cmd_plan_frames(args: argparse.Namespace) -> int:
    manifest = frames.plan_frames(
        duration_s=args.duration,
        fps=args.fps,
        interval_s=args.interval,
        video_id=args.video_id,
    )
    io.write_json(args.out, manifest.as_dict())
    if args.template is not None:
        commands = frames.emit_extraction_commands(manifest, args.template)
        body = "\n".join(commands) + "\n" if commands else ""
        if args.out_commands:
            io.atomic_write_text(args.out_commands, body)
        else:
            sys.stdout.write(body)
    print(f"planned {len(manifest.entries)} frames")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    predictions = io.load_predictions(args.pred)
    if args.score_floor > 0.0:
        predictions = predictions.above(args.score_floor)
    if args.range:
        result = map_range(dataset, predictions, mode=args.mode)
    else:
        result = map_at(dataset, predictions, args.iou, mode=args.mode)
    payload = {"score_floor": args.score_floor, **result.as_dict()}
    io.write_json(args.out, payload)
    shown = "n/a" if result.mean_ap is None else f"{result.mean_ap:.3f}"
    print(f"mAP: {shown}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args)
    predictions = io.load_predictions(args.pred)
    result = f1_sweep(dataset, predictions, args.iou)
    io.write_json(args.out, result.as_dict())
    if args.table:
        import csv as _csv
        import io as _io

        buffer = _io.StringIO()
        writer = _csv.writer(buffer, lineterminator="\n")
        writer.writerow(("threshold", "precision", "recall", "f1"))
        for point in result.sweep:
            writer.writerow(
                (
                    f"{point.threshold:.6f}",
                    f"{point.precision:.3f}",
                    f"{point.recall:.3f}",
                    f"{point.f1:.3f}",
                )
            )
        io.atomic_write_text(args.table, buffer.getvalue())
    print(
        f"best threshold {result.best_threshold:.6f}: "
        f"P {result.precision:.3f} R {result.recall:.3f} F1 {result.f1:.3f}"
    )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    did_anything = False
    if args.rows is not None:
        if not (args.out_table or args.out_csv):
            raise UsageError("--rows needs --out-table and/or --out-csv")
        rows = []
        for lineno, raw in enumerate(
            Path(args.rows).read_text(encoding="utf-8").splitlines(), start=1
        ):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append(report.ConfigMetrics.from_dict(json.loads(line)))
            except (json.JSONDecodeError, ValueError, TypeError) as exc:
                raise ParseError(f"bad metrics row: {exc}", line=lineno) from None
        if args.out_table:
            io.atomic_write_text(args.out_table, report.render_comparison_table(rows))
        if args.out_csv:
            io.atomic_write_text(args.out_csv, report.render_comparison_csv(rows))
        did_anything = True
    if args.eval is not None:
        if not args.out_per_class:
            raise UsageError("--eval needs --out-per-class")
        eval_payload = json.loads(Path(args.eval).read_text(encoding="utf-8"))
        try:
            result = ApResult.from_dict(eval_payload)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"bad evaluation report {args.eval}: {exc}") from None
        sweep = None
        if args.sweep is not None:
            sweep_payload = json.loads(Path(args.sweep).read_text(encoding="utf-8"))
            try:
                sweep = ThresholdSweepResult.from_dict(sweep_payload)
            except (KeyError, TypeError) as exc:
                raise ValueError(f"bad sweep report {args.sweep}: {exc}") from None
        io.atomic_write_text(
            args.out_per_class, report.render_per_class_report(result, sweep)
        )
        did_anything = True
    if not did_anything:
        raise UsageError("nothing to do: pass --rows and/or --eval")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Curate reef-survey detection datasets and score model output.",
    )
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    sub = subparsers.add_parser("stats", help="per-family instance counts and shares")
    _add_dataset_args(sub)
    sub.add_argument("--out-csv", metavar="PATH", help="write the histogram as CSV")
    sub.add_argument("--out-json", metavar="PATH", help="write the histogram as JSON")
    sub.set_defaults(func=cmd_stats)

    sub = subparsers.add_parser("curate", help="filter/remap a dataset and re-export it")
    _add_dataset_args(sub)
    sub.add_argument("--out", required=True, metavar="DIR", help="output dataset directory")
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--config",
        choices=curation.PRESETS,
        help="preset: A keeps all families, B the 10 most abundant, C additionally drops boxes under 500 px^2",
    )
    group.add_argument(
        "--top-k", type=_int_at_least(1), metavar="K", help="keep the K most abundant families"
    )
    group.add_argument(
        "--min-area",
        type=_float_at_least(0.0),
        metavar="PX2",
        help="drop boxes below this pixel area",
    )
    group.add_argument(
        "--keep",
        type=_keep_value,
        metavar="IDS",
        help="comma-separated class ids to keep, in the new id order",
    )
    sub.set_defaults(func=cmd_curate)

    sub = subparsers.add_parser("validate", help="check minimum annotation size")
    _add_dataset_args(sub)
    sub.add_argument(
        "--min-side",
        type=_float_at_least(0.0),
        default=curation.DEFAULT_MIN_SIDE_PX,
        metavar="PX",
        help="minimum longer-side length in pixels (default: %(default)s)",
    )
    sub.add_argument("--out", metavar="PATH", help="write the report as JSON")
    sub.set_defaults(func=cmd_validate)

    sub = subparsers.add_parser("split", help="deterministic train/val/test or k-fold split")
    _add_dataset_args(sub)
    sub.add_argument("--seed", type=int, required=True, help="RNG seed (recorded in the output)")
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument(
        "--ratios",
        type=_ratios_value,
        metavar="T,V,T",
        help="train,val,test ratios summing to 1",
    )
    group.add_argument(
        "--folds", type=_int_at_least(2), metavar="K", help="number of cross-validation folds"
    )
    sub.add_argument("--out", required=True, metavar="PATH", help="write the assignment as JSON")
    sub.set_defaults(func=cmd_split)

    sub = subparsers.add_parser("plan-frames", help="plan frame sampling for a video")
    sub.add_argument("--video-id", required=True, help="video identifier (e.g. file name)")
    sub.add_argument(
        "--duration", type=_float_at_least(0.0, exclusive=True), required=True, metavar="S"
    )
    sub.add_argument("--fps", type=_float_at_least(0.0, exclusive=True), required=True)
    sub.add_argument(
        "--interval",
        type=_float_at_least(0.0, exclusive=True),
        default=3.0,
        metavar="S",
        help="sampling interval in seconds (default: %(default)s)",
    )
    sub.add_argument("--out", required=True, metavar="PATH", help="write the manifest as JSON")
    sub.add_argument(
        "--template",
        help="command template with {video} {timestamp} {index} {out} placeholders",
    )
    sub.add_argument(
        "--out-commands",
        metavar="PATH",
        help="write rendered commands here instead of stdout",
    )
    sub.set_defaults(func=cmd_plan_frames)

    sub = subparsers.add_parser("evaluate", help="score predictions against ground truth")
    _add_dataset_args(sub)
    sub.add_argument("--pred", required=True, metavar="JSONL", help="prediction file")
    sub.add_argument(
        "--iou", type=_iou_value, default=0.5, help="IoU threshold (default: %(default)s)"
    )
    sub.add_argument(
        "--mode",
        choices=INTERPOLATION_MODES,
        default="101-point",
        help="AP interpolation mode (default: %(default)s)",
    )
    sub.add_argument(
        "--range",
        action="store_true",
        help="average over IoU 0.5:0.95 (step 0.05) instead of the single --iou",
    )
    sub.add_argument(
        "--score-floor",
        type=_unit_value,
        default=0.0,
        help="drop predictions below this confidence before scoring (default: %(default)s)",
    )
    sub.add_argument("--out", required=True, metavar="PATH", help="write the result as JSON")
    sub.set_defaults(func=cmd_evaluate)

    sub = subparsers.add_parser("sweep", help="find the F1-optimal confidence cutoff")
    _add_dataset_args(sub)
    sub.add_argument("--pred", required=True, metavar="JSONL", help="prediction file")
    sub.add_argument(
        "--iou", type=_iou_value, default=0.5, help="IoU threshold (default: %(default)s)"
    )
    sub.add_argument("--out", required=True, metavar="PATH", help="write the result as JSON")
    sub.add_argument("--table", metavar="PATH", help="also write the sweep table as CSV")
    sub.set_defaults(func=cmd_sweep)

    sub = subparsers.add_parser("report", help="render comparison tables and per-class CSVs")
    sub.add_argument("--rows", metavar="JSONL", help="ConfigMetrics rows to tabulate")
    sub.add_argument("--out-table", metavar="PATH", help="write the aligned text table")
    sub.add_argument("--out-csv", metavar="PATH", help="write the comparison CSV")
    sub.add_argument("--eval", metavar="JSON", help="evaluation result for a per-class CSV")
    sub.add_argument("--sweep", metavar="JSON", help="sweep result to add P/R/F1 columns")
    sub.add_argument("--out-per-class", metavar="PATH", help="write the per-class CSV")
    sub.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
