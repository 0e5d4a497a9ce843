"""Dataset filtering, class remapping, and annotation-rule checks.

Every curation op is a pure function Dataset -> CuratedDataset. Surviving
boxes are the input boxes unchanged except for class-id renumbering, and any
image left without boxes is dropped and counted — curated datasets never
contain box-less images.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from . import io
from .types import Dataset, FamilyClassMap, GroundTruthBox, ImageRecord

DEFAULT_MIN_SIDE_PX = 100.0
PRESET_TOP_K = 10
PRESET_MIN_AREA_PX2 = 500.0
PRESETS = ("A", "B", "C")


@dataclass(frozen=True)
class CurationPlan:
    """What a curation pass kept: class selection/remap plus size thresholds.

    When both a class selection and an area threshold are present, the
    selection and remap apply first, then the area filter.
    """

    kept_class_ids: tuple[int, ...]
    id_remap: dict[int, int]
    min_area_px2: float | None = None
    min_side_px: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kept_class_ids", tuple(self.kept_class_ids))
        expected = set(range(len(self.kept_class_ids)))
        if (
            set(self.id_remap) != set(self.kept_class_ids)
            or set(self.id_remap.values()) != expected
            or len(self.id_remap) != len(self.kept_class_ids)
        ):
            raise ValueError("id_remap is not a bijection from kept ids onto 0..K-1")

    def as_dict(self) -> dict:
        return {
            "kept_class_ids": list(self.kept_class_ids),
            "id_remap": {str(old): new for old, new in sorted(self.id_remap.items())},
            "min_area_px2": self.min_area_px2,
            "min_side_px": self.min_side_px,
        }


@dataclass(frozen=True)
class CuratedDataset:
    """A filtered dataset plus the plan applied and what it dropped."""

    dataset: Dataset
    plan: CurationPlan
    dropped_boxes: int
    dropped_images: int


def _apply(
    dataset: Dataset,
    kept_order: tuple[int, ...],
    new_map: FamilyClassMap,
    min_area_px2: float | None = None,
) -> CuratedDataset:
    remap = {old: new for new, old in enumerate(kept_order)}
    images: list[ImageRecord] = []
    dropped_boxes = 0
    dropped_images = 0
    for image in dataset.images:
        boxes: list[GroundTruthBox] = []
        for box in image.boxes:
            new_id = remap.get(box.class_id)
            if new_id is None:
                dropped_boxes += 1
                continue
            if (
                min_area_px2 is not None
                and box.pixel_area(image.width_px, image.height_px) < min_area_px2
            ):
                dropped_boxes += 1
                continue
            boxes.append(box if new_id == box.class_id else replace(box, class_id=new_id))
        if boxes:
            images.append(replace(image, boxes=tuple(boxes)))
        else:
            dropped_images += 1
    plan = CurationPlan(kept_order, remap, min_area_px2=min_area_px2)
    return CuratedDataset(
        dataset=Dataset(new_map, tuple(images)),
        plan=plan,
        dropped_boxes=dropped_boxes,
        dropped_images=dropped_images,
    )


def remap_classes(dataset: Dataset, keep: tuple[int, ...]) -> CuratedDataset:
    """Restrict to the given classes, renumbering ids 0..K-1 in the given order."""
    keep = tuple(keep)
    if not keep:
        raise ValueError("keep list is empty")
    seen: set[int] = set()
    for class_id in keep:
        if class_id not in dataset.class_map:
            raise ValueError(f"unknown class id {class_id}")
        if class_id in seen:
            raise ValueError(f"duplicate class id {class_id}")
        seen.add(class_id)
    new_map = FamilyClassMap(tuple(dataset.class_map.names[c] for c in keep))
    return _apply(dataset, keep, new_map)


def top_k_families(dataset: Dataset, k: int) -> CuratedDataset:
    """Keep the k most abundant families.

    Kept families are renumbered 0..k-1 in descending-count order (count
    ties by original id ascending); keeping every family leaves ids
    unchanged, so the op is the identity on datasets with no box-less
    images. k must not exceed the number of families that actually have
    instances.
    """
    counts = Counter(box.class_id for image in dataset.images for box in image.boxes)
    if not 1 <= k <= len(counts):
        raise ValueError(
            f"k={k} outside 1..{len(counts)} (families with at least one instance)"
        )
    if k == len(dataset.class_map):
        kept = tuple(range(k))  # no-op selection keeps original ids
    else:
        ranked = sorted(counts, key=lambda c: (-counts[c], c))
        kept = tuple(ranked[:k])
    return remap_classes(dataset, kept)


def filter_min_area(dataset: Dataset, min_area_px2: float) -> CuratedDataset:
    """Drop boxes whose pixel area falls below min_area_px2 (exact area survives)."""
    if min_area_px2 < 0:
        raise ValueError(f"negative area threshold {min_area_px2}")
    all_ids = tuple(range(len(dataset.class_map)))
    return _apply(dataset, all_ids, dataset.class_map, min_area_px2=min_area_px2)


def curate_preset(dataset: Dataset, preset: str) -> CuratedDataset:
    """Apply a named curation preset.

    A keeps every family (a 1:1 re-export), B keeps the 10 most abundant
    families, and C applies B and then drops boxes under 500 px². For C the
    intermediate coordinates are canonicalized through the 6-decimal label
    round-trip, so one preset run matches chaining two separate runs through
    files byte for byte.
    """
    if preset == "A":
        return remap_classes(dataset, tuple(range(len(dataset.class_map))))
    if preset == "B":
        return top_k_families(dataset, PRESET_TOP_K)
    if preset == "C":
        first = top_k_families(dataset, PRESET_TOP_K)
        canonical = io.canonicalize_labels(first.dataset)
        second = filter_min_area(canonical, PRESET_MIN_AREA_PX2)
        plan = CurationPlan(
            kept_class_ids=first.plan.kept_class_ids,
            id_remap=first.plan.id_remap,
            min_area_px2=PRESET_MIN_AREA_PX2,
        )
        return CuratedDataset(
            dataset=second.dataset,
            plan=plan,
            dropped_boxes=first.dropped_boxes + second.dropped_boxes,
            dropped_images=first.dropped_images + second.dropped_images,
        )
    raise ValueError(f"unknown preset {preset!r} (expected one of {', '.join(PRESETS)})")


@dataclass(frozen=True)
class RuleViolation:
    image_id: str
    box_index: int
    longer_side_px: float


@dataclass(frozen=True)
class ValidationReport:
    """Boxes whose longer pixel side falls below the minimum annotation size."""

    min_side_px: float
    n_boxes: int
    violations: tuple[RuleViolation, ...]

    def as_dict(self) -> dict:
        return {
            "min_side_px": self.min_side_px,
            "n_boxes": self.n_boxes,
            "n_violations": len(self.violations),
            "violations": [
                {
                    "image_id": v.image_id,
                    "box_index": v.box_index,
                    "longer_side_px": v.longer_side_px,
                }
                for v in self.violations
            ],
        }


def validate_annotation_rules(
    dataset: Dataset, min_side_px: float = DEFAULT_MIN_SIDE_PX
) -> ValidationReport:
    """Flag boxes smaller than min_side_px on their longer pixel side.

    Boxes exactly at the threshold pass. The annotation-size rule is read as
    a side length rather than an area, and the threshold is configurable for
    teams that interpret it differently.
    """
    if min_side_px < 0:
        raise ValueError(f"negative side threshold {min_side_px}")
    violations: list[RuleViolation] = []
    n_boxes = 0
    for image in dataset.images:
        for index, box in enumerate(image.boxes):
            n_boxes += 1
            side = box.longer_side_px(image.width_px, image.height_px)
            if side < min_side_px:
                violations.append(RuleViolation(image.image_id, index, side))
    return ValidationReport(min_side_px, n_boxes, tuple(violations))
