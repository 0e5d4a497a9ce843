"""Export inference results and trainer metrics for the evaluation toolkit.

Two jobs, both one-way: run a detector over an image directory and write
the line-delimited prediction interchange file (``image_id`` = file stem,
pixel ``[x1, y1, x2, y2]`` bbox, ``score``), and distill a trainer's
``results.csv`` into a single comparison-row record. Everything emitted
must parse on the other side, so scores are clamped into [0, 1] and boxes
that are degenerate after float conversion are skipped, not written.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .backends import DetectorBackend

IMAGE_SUFFIXES = (".jpg", ".jpeg", ".png", ".bmp")

METRIC_COLUMNS = {
    "precision": "metrics/precision(B)",
    "recall": "metrics/recall(B)",
    "map50": "metrics/mAP50(B)",
    "map5095": "metrics/mAP50-95(B)",
}


@dataclass(frozen=True)
class BridgeConfig:
    """One export run: which weights, which images, where the file goes."""

    weights: str
    image_dir: str | Path
    out_path: str | Path
    score_floor: float = 0.0
    nms_iou: float = 0.7

    def __post_init__(self):
        if not 0.0 <= self.score_floor <= 1.0:
            raise ValueError(f"score floor {self.score_floor} outside [0, 1]")
        if not 0.0 <= self.nms_iou <= 1.0:
            raise ValueError(f"NMS IoU {self.nms_iou} outside [0, 1]")


@dataclass(frozen=True)
class ExportSummary:
    n_images: int
    n_records: int
    n_skipped: int


def discover_images(image_dir: str | Path) -> list[Path]:
    """Image files directly in ``image_dir``, sorted by stem.

    The stem becomes the interchange ``image_id``, so two files that
    differ only in extension would collide; that's an error, not a pick.
    """
    root = Path(image_dir)
    if not root.is_dir():
        raise NotADirectoryError(f"image directory {root} does not exist")
    found = sorted(
        (p for p in root.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES),
        key=lambda p: (p.stem, p.name),
    )
    for left, right in zip(found, found[1:]):
        if left.stem == right.stem:
            raise ValueError(
                f"duplicate image id {left.stem!r} from {left.name} and {right.name}"
            )
    return found


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def export_predictions(
    cfg: BridgeConfig, backend: DetectorBackend, backend_label: str = ""
) -> ExportSummary:
    """Run ``backend`` over every image and write the interchange file.

    Records keep the backend's per-image order; images are visited in stem
    order, so a fixed backend gives byte-identical output. Detections below
    the score floor are dropped (``score >= floor`` keeps), and the run's
    settings go into ``#`` comment headers that interchange parsers skip.
    """
    images = discover_images(cfg.image_dir)
    label = backend_label or type(backend).__name__
    lines = [
        "# reefeval-bridge predictions",
        f"# weights={cfg.weights}",
        f"# backend={label}",
        f"# score_floor={cfg.score_floor!r}",
        f"# nms_iou={cfg.nms_iou!r}",
        f"# images={len(images)}",
    ]
    n_records = 0
    n_skipped = 0
    for image_path in images:
        for detection in backend.detect(image_path):
            class_id, x1, y1, x2, y2, score = detection
            class_id = int(class_id)
            if class_id < 0:
                raise ValueError(
                    f"backend produced negative class id {class_id} for {image_path.name}"
                )
            x1, y1, x2, y2, score = (float(v) for v in (x1, y1, x2, y2, score))
            if not all(math.isfinite(v) for v in (x1, y1, x2, y2, score)):
                n_skipped += 1
                continue
            if not (x1 < x2 and y1 < y2):
                n_skipped += 1
                continue
            score = min(max(score, 0.0), 1.0)
            if score < cfg.score_floor:
                continue
            lines.append(
                json.dumps(
                    {
                        "image_id": image_path.stem,
                        "class_id": class_id,
                        "bbox": [x1, y1, x2, y2],
                        "score": score,
                    }
                )
            )
            n_records += 1
    lines.append(f"# skipped_degenerate={n_skipped}")
    _atomic_write_text(Path(cfg.out_path), "\n".join(lines) + "\n")
    return ExportSummary(len(images), n_records, n_skipped)


def export_training_metrics(
    run_dir: str | Path, name: str, dataset_label: str = ""
) -> dict:
    """Distill a trainer run directory into one comparison-row dict.

    Reads ``results.csv`` (ultralytics layout: padded headers, one row per
    epoch), takes the final row, and clamps the four headline metrics into
    [0, 1]. The returned dict has the comparison-row keys ``name``,
    ``dataset``, ``precision``, ``recall``, ``map50``, ``map5095``.
    """
    if not name:
        raise ValueError("empty configuration name")
    summary_path = Path(run_dir) / "results.csv"
    with open(summary_path, encoding="utf-8") as handle:
        rows = [[cell.strip() for cell in row] for row in csv.reader(handle)]
    rows = [row for row in rows if any(row)]
    if len(rows) < 2:
        raise ValueError(f"{summary_path}: no data rows")
    header, last = rows[0], rows[-1]
    record: dict = {"name": name, "dataset": dataset_label}
    for key, column in METRIC_COLUMNS.items():
        try:
            index = header.index(column)
        except ValueError:
            raise ValueError(f"{summary_path}: missing column {column!r}") from None
        if index >= len(last):
            raise ValueError(f"{summary_path}: final row is missing {column!r}")
        try:
            value = float(last[index])
        except ValueError:
            raise ValueError(
                f"{summary_path}: bad value {last[index]!r} in column {column!r}"
            ) from None
        record[key] = min(max(value, 0.0), 1.0)
    return record
