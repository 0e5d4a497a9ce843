"""Deterministic frame-extraction planning for transect video."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import PurePosixPath
from string import Formatter

TEMPLATE_FIELDS = ("video", "timestamp", "index", "out")

# refuse to plan absurd schedules rather than grind forever
MAX_ENTRIES = 10_000_000


@dataclass(frozen=True)
class FrameManifest:
    """Sampling schedule for one video: (timestamp_s, frame_index) pairs.

    Timestamps are strictly increasing and below the duration; frame indices
    are unique (timestamps rounding to an already-used index are collapsed
    into the first occurrence).
    """

    video_id: str
    fps: float
    duration_s: float
    interval_s: float
    entries: tuple[tuple[float, int], ...]

    def as_dict(self) -> dict:
        return {
            "video_id": self.video_id,
            "fps": self.fps,
            "duration_s": self.duration_s,
            "interval_s": self.interval_s,
            "entries": [
                {"timestamp_s": t, "frame_index": i} for t, i in self.entries
            ],
        }


def plan_frames(
    duration_s: float,
    fps: float,
    interval_s: float = 3.0,
    video_id: str = "",
) -> FrameManifest:
    """Sample timestamps 0, interval, 2*interval, ... strictly below duration.

    The frame index is timestamp*fps rounded half away from zero. A clip
    duration that is an exact multiple of the interval excludes the endpoint.
    """
    if duration_s <= 0:
        raise ValueError(f"non-positive duration {duration_s}")
    if fps <= 0:
        raise ValueError(f"non-positive fps {fps}")
    if interval_s <= 0:
        raise ValueError(f"non-positive interval {interval_s}")
    if duration_s / interval_s > MAX_ENTRIES:
        raise ValueError(
            f"schedule would exceed {MAX_ENTRIES} entries; "
            f"check duration {duration_s} and interval {interval_s}"
        )
    entries: list[tuple[float, int]] = []
    used: set[int] = set()
    i = 0
    while True:
        t = i * interval_s
        if t >= duration_s:
            break
        index = math.floor(t * fps + 0.5)  # half away from zero; t*fps >= 0
        if index not in used:
            used.add(index)
            entries.append((t, index))
        i += 1
    return FrameManifest(video_id, fps, duration_s, interval_s, tuple(entries))


def emit_extraction_commands(manifest: FrameManifest, template: str) -> list[str]:
    """Render one command per entry from a template.

    Placeholders: {video} (the video id as given), {timestamp} (3 decimals),
    {index} (integer frame index), {out} (derived "<video stem>_<6-digit
    index>.jpg" file name). Any other placeholder is an error.
    """
    for _, field_name, _, _ in Formatter().parse(template):
        if field_name is None:
            continue
        base = field_name.split(".")[0].split("[")[0]
        if base not in TEMPLATE_FIELDS:
            raise ValueError(f"unknown placeholder {{{field_name}}}")
    stem = PurePosixPath(manifest.video_id).stem if manifest.video_id else "video"
    return [
        template.format(
            video=manifest.video_id,
            timestamp=f"{t:.3f}",
            index=index,
            out=f"{stem}_{index:06d}.jpg",
        )
        for t, index in manifest.entries
    ]
