"""Deterministic train/val/test and k-fold image splits."""

from __future__ import annotations

import math
import random
from collections import Counter, defaultdict
from dataclasses import dataclass

from .types import Dataset, ImageRecord

PARTS = ("train", "val", "test")
RATIO_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SplitAssignment:
    """Image-level partition: part names for ratio splits, fold indices for k-fold.

    Exactly one of ``ratios`` / ``k`` is set, matching how the assignment was
    produced.
    """

    partition: dict[str, str | int]
    seed: int
    ratios: tuple[float, float, float] | None = None
    k: int | None = None

    def __post_init__(self):
        if (self.ratios is None) == (self.k is None):
            raise ValueError("exactly one of ratios and k must be set")

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "ratios": list(self.ratios) if self.ratios is not None else None,
            "k": self.k,
            "partition": {key: self.partition[key] for key in sorted(self.partition)},
        }


def largest_remainder(n: int, ratios: tuple[float, ...]) -> list[int]:
    """Integer sizes summing to n, proportional to ratios.

    Floors first, then hands the leftover units to the largest fractional
    remainders (ties by position).
    """
    quotas = [r * n for r in ratios]
    base = [math.floor(q) for q in quotas]
    leftover = n - sum(base)
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:leftover]:
        base[i] += 1
    return base


def _strata_key(image: ImageRecord) -> tuple[int, int]:
    # dominant family: most instances, ties to the lowest class id;
    # box-less images form a final stratum of their own
    if not image.boxes:
        return (1, 0)
    counts = Counter(box.class_id for box in image.boxes)
    dominant = min(counts, key=lambda c: (-counts[c], c))
    return (0, dominant)


def split(
    dataset: Dataset, ratios: tuple[float, float, float], seed: int
) -> SplitAssignment:
    """Stratified train/val/test split, bit-reproducible for a given seed.

    Partition sizes come from largest-remainder rounding of ratio*N. Images
    are grouped by dominant family, shuffled within each group, and dealt to
    the partition currently furthest below its quota, which spreads each
    family across partitions roughly proportionally.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3:
        raise ValueError("expected exactly three ratios (train, val, test)")
    if any(r < 0 for r in ratios):
        raise ValueError(f"negative ratio in {ratios}")
    if abs(sum(ratios) - 1.0) > RATIO_TOLERANCE:
        raise ValueError(f"ratios sum to {sum(ratios)}, not 1")
    sizes = largest_remainder(len(dataset.images), ratios)
    rng = random.Random(seed)
    groups: dict[tuple[int, int], list[str]] = defaultdict(list)
    for image in dataset.images:
        groups[_strata_key(image)].append(image.image_id)
    ordered: list[str] = []
    for key in sorted(groups):
        members = sorted(groups[key])
        rng.shuffle(members)
        ordered.extend(members)
    assigned = [0, 0, 0]
    partition: dict[str, str | int] = {}
    for image_id in ordered:
        open_parts = [i for i in range(3) if assigned[i] < sizes[i]]
        pick = min(open_parts, key=lambda i: (assigned[i] / sizes[i], i))
        partition[image_id] = PARTS[pick]
        assigned[pick] += 1
    return SplitAssignment(partition=partition, seed=seed, ratios=ratios)


def k_fold(dataset: Dataset, k: int, seed: int) -> SplitAssignment:
    """Shuffled fold assignment with fold sizes differing by at most one."""
    n = len(dataset.images)
    if not 2 <= k <= n:
        raise ValueError(f"k={k} outside 2..{n}")
    rng = random.Random(seed)
    ids = sorted(image.image_id for image in dataset.images)
    rng.shuffle(ids)
    base, extra = divmod(n, k)
    partition: dict[str, str | int] = {}
    position = 0
    for fold in range(k):
        size = base + (1 if fold < extra else 0)
        for image_id in ids[position : position + size]:
            partition[image_id] = fold
        position += size
    return SplitAssignment(partition=partition, seed=seed, k=k)
