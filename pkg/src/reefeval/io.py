"""Readers and writers for the on-disk dataset, label, and prediction formats.

Formats:

* class map — plain text, one family name per line, line index = class id
* labels — YOLO text, one ``class_id cx cy w h`` line per box, normalized
* manifest — JSONL, one image record per line with ``image_id``, ``width_px``,
  ``height_px``, ``label_path`` (relative to the manifest) and optional
  ``source_video`` / ``timestamp_s``
* predictions — JSONL records with exactly ``image_id``, ``class_id``,
  ``bbox`` ([x1, y1, x2, y2] in pixels), ``score``; blank lines and ``#``
  header comments are skipped
"""

from __future__ import annotations

import json
import os
from dataclasses import replace
from pathlib import Path
from typing import Iterable

from .errors import ParseError
from .types import (
    EDGE_TOLERANCE,
    Dataset,
    FamilyClassMap,
    GroundTruthBox,
    ImageRecord,
    Prediction,
    PredictionSet,
)

PREDICTION_FIELDS = frozenset({"image_id", "class_id", "bbox", "score"})
MANIFEST_REQUIRED = ("image_id", "width_px", "height_px", "label_path")
MANIFEST_OPTIONAL = ("source_video", "timestamp_s")


# ---------------------------------------------------------------------------
# class map


def parse_class_map(text: str) -> FamilyClassMap:
    """Parse a class-map file: one family name per line, line index = class id."""
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ParseError("empty class map")
    names: list[str] = []
    for lineno, raw in enumerate(lines, start=1):
        name = raw.strip()
        if not name:
            raise ParseError("empty family name", line=lineno)
        if name in names:
            raise ParseError(f"duplicate family name {name!r}", line=lineno)
        names.append(name)
    return FamilyClassMap(tuple(names))


def serialize_class_map(class_map: FamilyClassMap) -> str:
    return "\n".join(class_map.names) + "\n" if len(class_map) else ""


def load_class_map(path: str | Path) -> FamilyClassMap:
    return parse_class_map(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# labels


def _clamp_unit(value: float, what: str, lineno: int) -> float:
    if value < -EDGE_TOLERANCE or value > 1.0 + EDGE_TOLERANCE:
        raise ParseError(f"{what}={value} outside [0, 1]", line=lineno)
    return min(max(value, 0.0), 1.0)


def parse_label_file(text: str, width_px: int, height_px: int) -> list[GroundTruthBox]:
    """Parse YOLO-style labels; one box per non-empty line.

    Coordinates up to EDGE_TOLERANCE outside [0, 1] are clamped into range;
    anything further out is rejected. The image dimensions rule out boxes
    that collapse to zero pixel area.
    """
    if width_px <= 0 or height_px <= 0:
        raise ValueError(f"non-positive image dimensions {width_px}x{height_px}")
    boxes: list[GroundTruthBox] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ParseError(f"expected 5 fields, got {len(parts)}", line=lineno)
        try:
            class_id = int(parts[0])
        except ValueError:
            raise ParseError(f"bad class id {parts[0]!r}", line=lineno) from None
        if class_id < 0:
            raise ParseError(f"negative class id {class_id}", line=lineno)
        try:
            cx, cy, w, h = (float(p) for p in parts[1:])
        except ValueError:
            raise ParseError(f"bad coordinate in {line!r}", line=lineno) from None
        cx = _clamp_unit(cx, "cx", lineno)
        cy = _clamp_unit(cy, "cy", lineno)
        w = _clamp_unit(w, "w", lineno)
        h = _clamp_unit(h, "h", lineno)
        if w <= 0.0:
            raise ParseError("zero-width box", line=lineno)
        if h <= 0.0:
            raise ParseError("zero-height box", line=lineno)
        try:
            box = GroundTruthBox(class_id, cx, cy, w, h)
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if box.pixel_area(width_px, height_px) <= 0.0:
            raise ParseError("zero pixel area", line=lineno)
        boxes.append(box)
    return boxes


def serialize_label_file(boxes: Iterable[GroundTruthBox]) -> str:
    """Render boxes one per line at 6 decimals; parse undoes this within 1e-6."""
    return "\n".join(
        f"{b.class_id} {b.cx:.6f} {b.cy:.6f} {b.w:.6f} {b.h:.6f}" for b in boxes
    )


# ---------------------------------------------------------------------------
# predictions


def parse_predictions(source: str | Iterable[str]) -> PredictionSet:
    """Parse line-delimited prediction records.

    Every line must be a JSON object with exactly the fields ``image_id``,
    ``class_id``, ``bbox``, ``score``. Blank lines and ``#`` comments (used
    by exporters for header metadata) are skipped.
    """
    lines = source.splitlines() if isinstance(source, str) else source
    predictions: list[Prediction] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", line=lineno) from None
        if not isinstance(record, dict):
            raise ParseError("record is not an object", line=lineno)
        missing = PREDICTION_FIELDS - record.keys()
        if missing:
            raise ParseError(f"missing field {sorted(missing)[0]!r}", line=lineno)
        extra = record.keys() - PREDICTION_FIELDS
        if extra:
            raise ParseError(f"unknown field {sorted(extra)[0]!r}", line=lineno)
        image_id = record["image_id"]
        if not isinstance(image_id, str) or not image_id:
            raise ParseError("image_id must be a non-empty string", line=lineno)
        class_id = record["class_id"]
        if isinstance(class_id, bool) or not isinstance(class_id, int):
            raise ParseError("class_id must be an integer", line=lineno)
        bbox = record["bbox"]
        if (
            not isinstance(bbox, list)
            or len(bbox) != 4
            or not all(_is_number(v) for v in bbox)
        ):
            raise ParseError("bbox must be [x1, y1, x2, y2]", line=lineno)
        score = record["score"]
        if not _is_number(score):
            raise ParseError("score must be a number", line=lineno)
        try:
            prediction = Prediction(
                image_id=image_id,
                class_id=class_id,
                x1=float(bbox[0]),
                y1=float(bbox[1]),
                x2=float(bbox[2]),
                y2=float(bbox[3]),
                score=float(score),
            )
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        predictions.append(prediction)
    return PredictionSet(tuple(predictions))


def load_predictions(path: str | Path) -> PredictionSet:
    return parse_predictions(Path(path).read_text(encoding="utf-8"))


def _is_number(value: object) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


# ---------------------------------------------------------------------------
# dataset manifests


def load_dataset(manifest_path: str | Path, classes_path: str | Path | None = None) -> Dataset:
    """Load a dataset from a JSONL manifest plus its class-map file.

    ``label_path`` entries resolve relative to the manifest's directory;
    ``classes_path`` defaults to ``classes.txt`` next to the manifest.
    """
    manifest_path = Path(manifest_path)
    if classes_path is None:
        classes_path = manifest_path.parent / "classes.txt"
    class_map = load_class_map(classes_path)
    base = manifest_path.parent
    images: list[ImageRecord] = []
    for lineno, raw in enumerate(
        manifest_path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad JSON: {exc.msg}", line=lineno) from None
        if not isinstance(record, dict):
            raise ParseError("manifest record is not an object", line=lineno)
        unknown = record.keys() - set(MANIFEST_REQUIRED) - set(MANIFEST_OPTIONAL)
        if unknown:
            raise ParseError(f"unknown field {sorted(unknown)[0]!r}", line=lineno)
        for field in MANIFEST_REQUIRED:
            if field not in record:
                raise ParseError(f"missing field {field!r}", line=lineno)
        image_id = record["image_id"]
        if not isinstance(image_id, str) or not image_id:
            raise ParseError("image_id must be a non-empty string", line=lineno)
        width_px, height_px = record["width_px"], record["height_px"]
        for name, value in (("width_px", width_px), ("height_px", height_px)):
            if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
                raise ParseError(f"{name} must be a positive integer", line=lineno)
        label_path = record["label_path"]
        if not isinstance(label_path, str) or not label_path:
            raise ParseError("label_path must be a non-empty string", line=lineno)
        source_video = record.get("source_video")
        if source_video is not None and not isinstance(source_video, str):
            raise ParseError("source_video must be a string", line=lineno)
        timestamp_s = record.get("timestamp_s")
        if timestamp_s is not None and (not _is_number(timestamp_s) or timestamp_s < 0):
            raise ParseError("timestamp_s must be a non-negative number", line=lineno)
        label_text = (base / label_path).read_text(encoding="utf-8")
        try:
            boxes = parse_label_file(label_text, width_px, height_px)
        except ParseError as exc:
            raise ParseError(f"{label_path}: {exc}") from None
        images.append(
            ImageRecord(
                image_id=image_id,
                width_px=width_px,
                height_px=height_px,
                boxes=tuple(boxes),
                source_video=source_video,
                timestamp_s=float(timestamp_s) if timestamp_s is not None else None,
            )
        )
    return Dataset(class_map=class_map, images=tuple(images))


def _check_exportable_id(image_id: str) -> None:
    if (
        not image_id
        or image_id in (".", "..")
        or any(ch in image_id for ch in ("/", "\\", "\x00"))
    ):
        raise ValueError(f"image id {image_id!r} is not usable as a label file name")


def save_dataset(dataset: Dataset, out_dir: str | Path) -> None:
    """Write classes.txt, labels/<image_id>.txt, and manifest.jsonl under out_dir.

    Everything is rendered before anything is written and each file is
    written atomically, so a failing export never leaves partial files.
    """
    out_dir = Path(out_dir)
    label_files: dict[str, str] = {}
    manifest_lines: list[str] = []
    for image in dataset.images:
        _check_exportable_id(image.image_id)
        label_rel = f"labels/{image.image_id}.txt"
        body = serialize_label_file(image.boxes)
        label_files[label_rel] = body + "\n" if body else ""
        record: dict[str, object] = {
            "image_id": image.image_id,
            "width_px": image.width_px,
            "height_px": image.height_px,
            "label_path": label_rel,
        }
        if image.source_video is not None:
            record["source_video"] = image.source_video
        if image.timestamp_s is not None:
            record["timestamp_s"] = image.timestamp_s
        manifest_lines.append(json.dumps(record))
    (out_dir / "labels").mkdir(parents=True, exist_ok=True)
    atomic_write_text(out_dir / "classes.txt", serialize_class_map(dataset.class_map))
    for rel, text in label_files.items():
        atomic_write_text(out_dir / rel, text)
    atomic_write_text(
        out_dir / "manifest.jsonl",
        "\n".join(manifest_lines) + "\n" if manifest_lines else "",
    )


def canonicalize_labels(dataset: Dataset) -> Dataset:
    """Round every box through the 6-decimal label format, as a save/load would."""
    images = []
    for image in dataset.images:
        boxes = parse_label_file(
            serialize_label_file(image.boxes), image.width_px, image.height_px
        )
        images.append(replace(image, boxes=tuple(boxes)))
    return Dataset(dataset.class_map, tuple(images))


# ---------------------------------------------------------------------------
# generic output helpers


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write text via a temp file and rename, so readers never see partials."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    try:
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)
    finally:
        tmp.unlink(missing_ok=True)


def write_json(path: str | Path, payload: object) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2) + "\n")
