"""Domain types for annotated survey imagery and detector predictions.

Ground truth lives in normalized YOLO center format (cx, cy, w, h in [0, 1]);
predictions live in pixel corner format (x1, y1, x2, y2). Conversion between
the two is anchored to the owning image's pixel dimensions.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

#: How far a normalized coordinate or box edge may sit outside [0, 1] before
#: it is rejected rather than clamped.
EDGE_TOLERANCE = 1e-6

#: Pixel-space corner box (x1, y1, x2, y2).
PixelBox = tuple[float, float, float, float]


@dataclass(frozen=True)
class FamilyClassMap:
    """Ordered set of fish-family labels; the class id is the list position."""

    names: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        seen: set[str] = set()
        for class_id, name in enumerate(self.names):
            if not name:
                raise ValueError(f"family name for class {class_id} is empty")
            if name in seen:
                raise ValueError(f"duplicate family name {name!r}")
            seen.add(name)

    @property
    def entries(self) -> tuple[tuple[int, str], ...]:
        return tuple(enumerate(self.names))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, class_id: object) -> bool:
        return isinstance(class_id, int) and 0 <= class_id < len(self.names)

    def name_of(self, class_id: int) -> str:
        if class_id not in self:
            raise ValueError(f"unknown class id {class_id}")
        return self.names[class_id]

    def id_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValueError(f"unknown family {name!r}") from None


@dataclass(frozen=True)
class GroundTruthBox:
    """One annotated box in normalized center format.

    Center coordinates lie in [0, 1] and width/height in (0, 1]; the box
    edges may poke at most EDGE_TOLERANCE outside the unit square (parsers
    clamp raw values into range before construction).
    """

    class_id: int
    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        if self.class_id < 0:
            raise ValueError(f"negative class id {self.class_id}")
        for name in ("cx", "cy"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        for name in ("w", "h"):
            value = getattr(self, name)
            if not 0.0 < value <= 1.0:
                raise ValueError(f"{name}={value} outside (0, 1]")
        for low, high, axis in (
            (self.cx - self.w / 2, self.cx + self.w / 2, "x"),
            (self.cy - self.h / 2, self.cy + self.h / 2, "y"),
        ):
            if low < -EDGE_TOLERANCE or high > 1.0 + EDGE_TOLERANCE:
                raise ValueError(f"box extends past the unit square on the {axis} axis")

    def to_pixels(self, width_px: int, height_px: int) -> PixelBox:
        """Corner coordinates (x1, y1, x2, y2) in pixels for the given image size."""
        return (
            (self.cx - self.w / 2) * width_px,
            (self.cy - self.h / 2) * height_px,
            (self.cx + self.w / 2) * width_px,
            (self.cy + self.h / 2) * height_px,
        )

    @classmethod
    def from_pixels(
        cls,
        class_id: int,
        x1: float,
        y1: float,
        x2: float,
        y2: float,
        width_px: int,
        height_px: int,
    ) -> "GroundTruthBox":
        """Inverse of to_pixels for the same image size."""
        return cls(
            class_id,
            (x1 + x2) / (2.0 * width_px),
            (y1 + y2) / (2.0 * height_px),
            (x2 - x1) / width_px,
            (y2 - y1) / height_px,
        )

    def pixel_area(self, width_px: int, height_px: int) -> float:
        return (self.w * width_px) * (self.h * height_px)

    def longer_side_px(self, width_px: int, height_px: int) -> float:
        return max(self.w * width_px, self.h * height_px)


@dataclass(frozen=True)
class ImageRecord:
    """One annotated frame: pixel dimensions plus its ground-truth boxes."""

    image_id: str
    width_px: int
    height_px: int
    boxes: tuple[GroundTruthBox, ...] = ()
    source_video: str | None = None
    timestamp_s: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))
        if not self.image_id:
            raise ValueError("empty image id")
        if self.width_px <= 0 or self.height_px <= 0:
            raise ValueError(
                f"non-positive dimensions {self.width_px}x{self.height_px}"
                f" for image {self.image_id!r}"
            )
        if self.timestamp_s is not None and self.timestamp_s < 0:
            raise ValueError(f"negative timestamp for image {self.image_id!r}")
        for index, box in enumerate(self.boxes):
            if box.pixel_area(self.width_px, self.height_px) <= 0.0:
                raise ValueError(f"box {index} of image {self.image_id!r} has zero pixel area")


@dataclass(frozen=True)
class Dataset:
    """A class map plus every annotated image."""

    class_map: FamilyClassMap
    images: tuple[ImageRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        seen: set[str] = set()
        for image in self.images:
            if image.image_id in seen:
                raise ValueError(f"duplicate image id {image.image_id!r}")
            seen.add(image.image_id)
            for box in image.boxes:
                if box.class_id not in self.class_map:
                    raise ValueError(
                        f"box in image {image.image_id!r} references unknown class {box.class_id}"
                    )

    @property
    def n_boxes(self) -> int:
        return sum(len(image.boxes) for image in self.images)


@dataclass(frozen=True)
class Prediction:
    """One detector output box, in pixel corner coordinates."""

    image_id: str
    class_id: int
    x1: float
    y1: float
    x2: float
    y2: float
    score: float

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("empty image id")
        if self.class_id < 0:
            raise ValueError(f"negative class id {self.class_id}")
        if not self.x1 < self.x2:
            raise ValueError(f"x1={self.x1} is not below x2={self.x2}")
        if not self.y1 < self.y2:
            raise ValueError(f"y1={self.y1} is not below y2={self.y2}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")

    @property
    def box(self) -> PixelBox:
        return (self.x1, self.y1, self.x2, self.y2)


@dataclass(frozen=True)
class PredictionSet:
    """An ordered collection of predictions, usually one whole model run."""

    predictions: tuple[Prediction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "predictions", tuple(self.predictions))

    def __len__(self) -> int:
        return len(self.predictions)

    def __iter__(self):
        return iter(self.predictions)

    def above(self, score_floor: float) -> "PredictionSet":
        """Predictions with score >= score_floor, order preserved."""
        if not 0.0 <= score_floor <= 1.0:
            raise ValueError(f"score floor {score_floor} outside [0, 1]")
        return PredictionSet(tuple(p for p in self.predictions if p.score >= score_floor))


@dataclass(frozen=True)
class FamilyCount:
    class_id: int
    family: str
    count: int
    share: float


@dataclass(frozen=True)
class FamilyHistogram:
    """Instance counts per family, sorted by count descending (ties by class id)."""

    entries: tuple[FamilyCount, ...]
    total: int
    n_images: int

    def as_dict(self) -> dict:
        return {
            "n_images": self.n_images,
            "total": self.total,
            "families": [
                {
                    "class_id": e.class_id,
                    "family": e.family,
                    "count": e.count,
                    "share": e.share,
                }
                for e in self.entries
            ],
        }


def dataset_stats(dataset: Dataset) -> FamilyHistogram:
    """Per-family instance counts and shares over the whole dataset.

    Every family in the class map gets an entry, zero-count ones included;
    shares are count/total, or 0.0 throughout when the dataset has no boxes.
    """
    counts = Counter(box.class_id for image in dataset.images for box in image.boxes)
    total = sum(counts.values())
    order = sorted(range(len(dataset.class_map)), key=lambda c: (-counts[c], c))
    entries = tuple(
        FamilyCount(
            class_id=c,
            family=dataset.class_map.names[c],
            count=counts[c],
            share=counts[c] / total if total else 0.0,
        )
        for c in order
    )
    return FamilyHistogram(entries=entries, total=total, n_images=len(dataset.images))
