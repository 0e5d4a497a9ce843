"""Precision-recall curves, average precision, and F1 threshold sweeps.

Conventions, spelled out because every one of them changes the numbers:

* Matching is greedy per (image, class) cell; per-image results for a class
  are pooled and re-ranked globally before any curve is built.
* A class with no ground-truth instances has an undefined AP and is left out
  of the mean; its false positives still count against precision in the F1
  sweep while they survive the confidence cutoff.
* ``exact`` AP integrates the monotone precision envelope over the observed
  recall steps; ``101-point`` AP averages the interpolated precision at
  recalls 0.00, 0.01, ..., 1.00.
* The F1 sweep tries every distinct prediction score as the cutoff, keeps
  predictions with score >= cutoff, macro-averages per-class precision and
  recall, and derives F1 from the macro values. F1 ties take the higher
  cutoff.
"""

from __future__ import annotations

from bisect import bisect_right
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .matching import MatchResult, match_detections, merge_matches
from .types import Dataset, FamilyClassMap, Prediction, PredictionSet

INTERPOLATION_MODES = ("exact", "101-point")

_RECALL_GRID = np.arange(101) / 100.0


@dataclass(frozen=True)
class PRCurve:
    """Cumulative (recall, precision) after each ranked prediction."""

    points: tuple[tuple[float, float], ...]
    n_gt: int

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))


def pr_curve(match: MatchResult) -> PRCurve:
    """Ranked precision-recall curve for one class over the whole dataset.

    Raises when predictions exist but the class has no ground truth; the
    caller reports AP as undefined in that case instead of drawing a curve
    pinned at zero recall.
    """
    if match.n_gt == 0 and match.verdicts:
        raise ValueError("precision-recall curve undefined without ground truth")
    points: list[tuple[float, float]] = []
    tp = 0
    for rank, verdict in enumerate(match.verdicts, start=1):
        if verdict.is_tp:
            tp += 1
        points.append((tp / match.n_gt, tp / rank))
    return PRCurve(tuple(points), match.n_gt)


def average_precision(curve: PRCurve, mode: str = "101-point") -> float:
    """Area under the interpolated precision envelope of a ranked PR curve.

    An empty curve (no predictions) scores 0.0.
    """
    if mode not in INTERPOLATION_MODES:
        raise ValueError(f"unknown interpolation mode {mode!r}")
    if not curve.points:
        return 0.0
    recalls = np.array([p[0] for p in curve.points], dtype=np.float64)
    precisions = np.array([p[1] for p in curve.points], dtype=np.float64)
    # best precision at this recall or beyond
    envelope = np.maximum.accumulate(precisions[::-1])[::-1]
    if mode == "exact":
        gaps = np.diff(recalls, prepend=0.0)
        return float(np.sum(gaps * envelope))
    first_at_or_above = np.searchsorted(recalls, _RECALL_GRID, side="left")
    reachable = first_at_or_above < len(recalls)
    interpolated = np.where(
        reachable, envelope[np.minimum(first_at_or_above, len(recalls) - 1)], 0.0
    )
    return float(interpolated.mean())


@dataclass(frozen=True)
class ApResult:
    """Per-class average precision plus the mean over classes with ground truth.

    ``per_class_ap`` maps every class id in the map to its AP, or None when
    the class has no ground-truth instances (undefined, excluded from
    ``mean_ap``). ``mean_ap`` is None only when no class has ground truth.
    """

    per_class_ap: dict[int, float | None]
    mean_ap: float | None
    iou_thresholds: tuple[float, ...]
    mode: str
    class_map: FamilyClassMap

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "iou_thresholds": list(self.iou_thresholds),
            "mean_ap": self.mean_ap,
            "families": list(self.class_map.names),
            "per_class_ap": {str(c): self.per_class_ap[c] for c in sorted(self.per_class_ap)},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ApResult":
        class_map = FamilyClassMap(tuple(data["families"]))
        per_class = {int(c): ap for c, ap in data["per_class_ap"].items()}
        return cls(
            per_class_ap=per_class,
            mean_ap=data["mean_ap"],
            iou_thresholds=tuple(data["iou_thresholds"]),
            mode=data["mode"],
            class_map=class_map,
        )


def _validate_predictions(dataset: Dataset, predictions: PredictionSet) -> None:
    image_ids = {image.image_id for image in dataset.images}
    for p in predictions:
        if p.image_id not in image_ids:
            raise ValueError(f"prediction references unknown image {p.image_id!r}")
        if p.class_id not in dataset.class_map:
            raise ValueError(f"prediction references unknown class {p.class_id}")


def matches_per_class(
    dataset: Dataset, predictions: PredictionSet, iou_threshold: float
) -> dict[int, MatchResult]:
    """Greedy-match every (image, class) cell and pool per class.

    Every class in the map gets an entry, empty classes included.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou threshold {iou_threshold} outside (0, 1]")
    _validate_predictions(dataset, predictions)
    preds_by_image: dict[str, list[Prediction]] = defaultdict(list)
    for p in predictions:
        preds_by_image[p.image_id].append(p)
    per_class: dict[int, list[MatchResult]] = {
        c: [] for c in range(len(dataset.class_map))
    }
    for image in dataset.images:
        gts_by_class: dict[int, list] = defaultdict(list)
        for box in image.boxes:
            gts_by_class[box.class_id].append(box.to_pixels(image.width_px, image.height_px))
        image_preds_by_class: dict[int, list[Prediction]] = defaultdict(list)
        for p in preds_by_image.get(image.image_id, ()):
            image_preds_by_class[p.class_id].append(p)
        for c in set(gts_by_class) | set(image_preds_by_class):
            per_class[c].append(
                match_detections(
                    gts_by_class.get(c, ()),
                    image_preds_by_class.get(c, ()),
                    iou_threshold,
                )
            )
    return {c: merge_matches(results) for c, results in per_class.items()}


def map_at(
    dataset: Dataset,
    predictions: PredictionSet,
    iou_threshold: float = 0.5,
    mode: str = "101-point",
) -> ApResult:
    """Per-class AP pooled over all images at a single IoU threshold."""
    if mode not in INTERPOLATION_MODES:
        raise ValueError(f"unknown interpolation mode {mode!r}")
    matches = matches_per_class(dataset, predictions, iou_threshold)
    per_class: dict[int, float | None] = {}
    defined: list[float] = []
    for c in sorted(matches):
        match = matches[c]
        if match.n_gt == 0:
            per_class[c] = None
        else:
            ap = average_precision(pr_curve(match), mode)
            per_class[c] = ap
            defined.append(ap)
    mean_ap = sum(defined) / len(defined) if defined else None
    return ApResult(per_class, mean_ap, (iou_threshold,), mode, dataset.class_map)


def map_range(
    dataset: Dataset,
    predictions: PredictionSet,
    start: float = 0.5,
    end: float = 0.95,
    step: float = 0.05,
    mode: str = "101-point",
) -> ApResult:
    """Mean AP over an inclusive ladder of IoU thresholds (default 0.5:0.95)."""
    if not 0.0 < start <= end <= 1.0:
        raise ValueError(f"bad threshold range [{start}, {end}]")
    if step <= 0.0:
        raise ValueError(f"non-positive step {step}")
    count = int((end - start) / step + 1e-6) + 1
    thresholds = tuple(start + i * step for i in range(count))
    if not thresholds:
        raise ValueError("empty threshold set")
    results = [map_at(dataset, predictions, t, mode) for t in thresholds]
    per_class: dict[int, float | None] = {}
    for c in results[0].per_class_ap:
        values = [r.per_class_ap[c] for r in results]
        per_class[c] = None if values[0] is None else sum(values) / len(values)
    defined = [v for v in per_class.values() if v is not None]
    mean_ap = sum(defined) / len(defined) if defined else None
    return ApResult(per_class, mean_ap, thresholds, mode, dataset.class_map)


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ClassPRF:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class ThresholdSweepResult:
    """Macro precision/recall/F1 across candidate confidence cutoffs.

    ``sweep`` is ordered by descending threshold; ``per_class_at_best``
    covers classes with ground truth only.
    """

    iou_threshold: float
    best_threshold: float
    precision: float
    recall: float
    f1: float
    sweep: tuple[SweepPoint, ...]
    per_class_at_best: dict[int, ClassPRF]
    class_map: FamilyClassMap

    def as_dict(self) -> dict:
        return {
            "iou_threshold": self.iou_threshold,
            "best_threshold": self.best_threshold,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "families": list(self.class_map.names),
            "per_class_at_best": {
                str(c): {
                    "precision": prf.precision,
                    "recall": prf.recall,
                    "f1": prf.f1,
                }
                for c, prf in sorted(self.per_class_at_best.items())
            },
            "sweep": [
                {
                    "threshold": point.threshold,
                    "precision": point.precision,
                    "recall": point.recall,
                    "f1": point.f1,
                }
                for point in self.sweep
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdSweepResult":
        return cls(
            iou_threshold=data["iou_threshold"],
            best_threshold=data["best_threshold"],
            precision=data["precision"],
            recall=data["recall"],
            f1=data["f1"],
            sweep=tuple(
                SweepPoint(p["threshold"], p["precision"], p["recall"], p["f1"])
                for p in data["sweep"]
            ),
            per_class_at_best={
                int(c): ClassPRF(v["precision"], v["recall"], v["f1"])
                for c, v in data["per_class_at_best"].items()
            },
            class_map=FamilyClassMap(tuple(data["families"])),
        )


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def f1_sweep(
    dataset: Dataset, predictions: PredictionSet, iou_threshold: float = 0.5
) -> ThresholdSweepResult:
    """Find the confidence cutoff that maximizes macro-averaged F1.

    Greedy matching at a cutoff equals the full matching restricted to the
    predictions scoring at or above it (the greedy state never depends on
    lower-ranked predictions), so the sweep counts prefixes of one matching
    pass instead of re-matching per candidate.
    """
    if dataset.n_boxes == 0:
        raise ValueError("F1 sweep requires ground truth")
    if len(predictions) == 0:
        raise ValueError("F1 sweep requires at least one prediction")
    matches = matches_per_class(dataset, predictions, iou_threshold)
    neg_scores: dict[int, list[float]] = {}
    cum_tp: dict[int, list[int]] = {}
    for c, match in matches.items():
        neg_scores[c] = [-v.prediction.score for v in match.verdicts]
        running, total = [0], 0
        for verdict in match.verdicts:
            total += 1 if verdict.is_tp else 0
            running.append(total)
        cum_tp[c] = running

    def counts(c: int, cutoff: float) -> tuple[int, int]:
        kept = bisect_right(neg_scores[c], -cutoff)
        tp = cum_tp[c][kept]
        return tp, kept - tp

    candidates = sorted({p.score for p in predictions}, reverse=True)
    sweep: list[SweepPoint] = []
    for cutoff in candidates:
        precisions: list[float] = []
        recalls: list[float] = []
        for c, match in matches.items():
            tp, fp = counts(c, cutoff)
            if match.n_gt > 0:
                precisions.append(tp / (tp + fp) if tp + fp else 0.0)
                recalls.append(tp / match.n_gt)
            elif tp + fp:
                precisions.append(0.0)
        macro_p = sum(precisions) / len(precisions) if precisions else 0.0
        macro_r = sum(recalls) / len(recalls) if recalls else 0.0
        sweep.append(SweepPoint(cutoff, macro_p, macro_r, _f1(macro_p, macro_r)))
    best = max(sweep, key=lambda point: point.f1)  # first max = highest cutoff
    per_class_at_best: dict[int, ClassPRF] = {}
    for c, match in matches.items():
        if match.n_gt == 0:
            continue
        tp, fp = counts(c, best.threshold)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / match.n_gt
        per_class_at_best[c] = ClassPRF(precision, recall, _f1(precision, recall))
    return ThresholdSweepResult(
        iou_threshold=iou_threshold,
        best_threshold=best.threshold,
        precision=best.precision,
        recall=best.recall,
        f1=best.f1,
        sweep=tuple(sweep),
        per_class_at_best=per_class_at_best,
        class_map=dataset.class_map,
    )
