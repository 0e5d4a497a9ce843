"""Box overlap and greedy prediction-to-truth matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .types import PixelBox, Prediction


def iou(a: PixelBox, b: PixelBox) -> float:
    """Intersection over union of two pixel-space corner boxes."""
    ax1, ay1, ax2, ay2 = a
    bx1, by1, bx2, by2 = b
    if ax1 >= ax2 or ay1 >= ay2 or bx1 >= bx2 or by1 >= by2:
        raise ValueError("degenerate box")
    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = (ax2 - ax1) * (ay2 - ay1) + (bx2 - bx1) * (by2 - by1) - inter
    return inter / union


@dataclass(frozen=True)
class Verdict:
    """One ranked prediction plus the ground truth it matched, if any.

    ``overlap`` is the best IoU the prediction saw among the ground truths
    still unmatched when it was processed (0.0 when there were none).
    """

    prediction: Prediction
    gt_index: int | None
    overlap: float

    @property
    def is_tp(self) -> bool:
        return self.gt_index is not None


@dataclass(frozen=True)
class MatchResult:
    """Per-prediction verdicts in descending-confidence order."""

    verdicts: tuple[Verdict, ...]
    n_gt: int

    def __post_init__(self):
        object.__setattr__(self, "verdicts", tuple(self.verdicts))
        if self.n_gt < 0:
            raise ValueError(f"negative ground-truth count {self.n_gt}")

    @property
    def n_tp(self) -> int:
        return sum(1 for v in self.verdicts if v.is_tp)

    @property
    def n_fp(self) -> int:
        return len(self.verdicts) - self.n_tp

    @property
    def n_fn(self) -> int:
        return self.n_gt - self.n_tp


def match_detections(
    gt_boxes: Sequence[PixelBox],
    predictions: Sequence[Prediction],
    iou_threshold: float,
) -> MatchResult:
    """Greedy one-to-one matching in descending confidence order.

    Each prediction takes the still-unmatched ground truth with the highest
    overlap (overlap ties go to the lowest ground-truth index) provided that
    overlap reaches ``iou_threshold``; otherwise it is a false positive.
    Score ties keep input order. All predictions must belong to the same
    image and class — the caller does the grouping.
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou threshold {iou_threshold} outside (0, 1]")
    cells = {(p.image_id, p.class_id) for p in predictions}
    if len(cells) > 1:
        raise ValueError(f"predictions span multiple image/class cells: {sorted(cells)}")
    ranked = sorted(predictions, key=lambda p: -p.score)
    taken = [False] * len(gt_boxes)
    verdicts: list[Verdict] = []
    for prediction in ranked:
        best_overlap = 0.0
        best_index: int | None = None
        for index, gt in enumerate(gt_boxes):
            if taken[index]:
                continue
            overlap = iou(prediction.box, gt)
            if overlap > best_overlap:
                best_overlap, best_index = overlap, index
        if best_index is not None and best_overlap >= iou_threshold:
            taken[best_index] = True
            verdicts.append(Verdict(prediction, best_index, best_overlap))
        else:
            verdicts.append(Verdict(prediction, None, best_overlap))
    return MatchResult(tuple(verdicts), len(gt_boxes))


def merge_matches(results: Iterable[MatchResult]) -> MatchResult:
    """Pool per-image match results for one class into a single ranked list.

    Verdicts are re-sorted by descending confidence (stable, so score ties
    keep the pooling order, which callers hold fixed at dataset order).
    """
    pooled = list(results)
    verdicts = [v for result in pooled for v in result.verdicts]
    verdicts.sort(key=lambda v: -v.prediction.score)
    return MatchResult(tuple(verdicts), sum(r.n_gt for r in pooled))
