"""Stable text and CSV rendering of metric tables and histograms.

All numeric cells are fixed at 3 decimals; undefined values render as the
"n/a" sentinel. Column order never changes, so downstream diffs stay clean.
"""

from __future__ import annotations

import csv
import io as _stringio
from dataclasses import dataclass
from typing import Iterable

from .errors import ParseError
from .metrics import ApResult, ThresholdSweepResult
from .types import FamilyHistogram

COMPARISON_COLUMNS = ("Model", "Dataset", "Precision", "Recall", "mAP@0.5", "mAP@0.5:0.95")
NA = "n/a"


@dataclass(frozen=True)
class ConfigMetrics:
    """One comparison-table row: headline metrics for a named configuration."""

    name: str
    dataset_label: str
    precision: float
    recall: float
    map50: float
    map5095: float

    def __post_init__(self):
        if not self.name:
            raise ValueError("empty configuration name")
        for metric in ("precision", "recall", "map50", "map5095"):
            value = getattr(self, metric)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{metric}={value} outside [0, 1]")

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "dataset": self.dataset_label,
            "precision": self.precision,
            "recall": self.recall,
            "map50": self.map50,
            "map5095": self.map5095,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ConfigMetrics":
        try:
            return cls(
                name=data["name"],
                dataset_label=data["dataset"],
                precision=data["precision"],
                recall=data["recall"],
                map50=data["map50"],
                map5095=data["map5095"],
            )
        except KeyError as exc:
            raise ValueError(f"missing field {exc.args[0]!r} in metrics row") from None


def _metric_cells(row: ConfigMetrics) -> list[str]:
    return [
        f"{row.precision:.3f}",
        f"{row.recall:.3f}",
        f"{row.map50:.3f}",
        f"{row.map5095:.3f}",
    ]


def _require_rows(rows: Iterable[ConfigMetrics]) -> list[ConfigMetrics]:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to render")
    return rows


def render_comparison_table(rows: Iterable[ConfigMetrics]) -> str:
    """Aligned plain-text table, one configuration per row, input order kept."""
    rows = _require_rows(rows)
    table = [list(COMPARISON_COLUMNS)]
    table += [[row.name, row.dataset_label, *_metric_cells(row)] for row in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(COMPARISON_COLUMNS))]
    lines = [
        "  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip()
        for line in table
    ]
    return "\n".join(lines) + "\n"


def render_comparison_csv(rows: Iterable[ConfigMetrics]) -> str:
    rows = _require_rows(rows)
    out = _stringio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COMPARISON_COLUMNS)
    for row in rows:
        writer.writerow([row.name, row.dataset_label, *_metric_cells(row)])
    return out.getvalue()


def parse_comparison_csv(text: str) -> list[ConfigMetrics]:
    """Read back a comparison CSV (3-decimal resolution)."""
    reader = csv.reader(_stringio.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty comparison CSV") from None
    if tuple(header) != COMPARISON_COLUMNS:
        raise ParseError(f"unexpected header {header!r}")
    rows = []
    for lineno, cells in enumerate(reader, start=2):
        if not cells:
            continue
        if len(cells) != len(COMPARISON_COLUMNS):
            raise ParseError(f"expected {len(COMPARISON_COLUMNS)} cells", line=lineno)
        try:
            rows.append(
                ConfigMetrics(
                    name=cells[0],
                    dataset_label=cells[1],
                    precision=float(cells[2]),
                    recall=float(cells[3]),
                    map50=float(cells[4]),
                    map5095=float(cells[5]),
                )
            )
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return rows


def render_family_histogram(histogram: FamilyHistogram) -> str:
    """CSV of per-family counts and shares, descending count order."""
    out = _stringio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(("family", "count", "share"))
    for entry in histogram.entries:
        writer.writerow((entry.family, entry.count, f"{entry.share:.3f}"))
    return out.getvalue()


def render_per_class_report(
    result: ApResult, sweep: ThresholdSweepResult | None = None
) -> str:
    """CSV of per-family AP, best first; families without ground truth last.

    With a sweep, per-family precision/recall/F1 at the sweep's best cutoff
    are appended as extra columns.
    """
    if sweep is not None and sweep.class_map != result.class_map:
        raise ValueError("evaluation result and sweep use different class maps")
    header = ["family", "ap"]
    if sweep is not None:
        header += ["precision", "recall", "f1"]
    defined = sorted(
        (c for c, ap in result.per_class_ap.items() if ap is not None),
        key=lambda c: (-result.per_class_ap[c], c),
    )
    undefined = sorted(c for c, ap in result.per_class_ap.items() if ap is None)
    out = _stringio.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for c in [*defined, *undefined]:
        ap = result.per_class_ap[c]
        cells = [result.class_map.name_of(c), NA if ap is None else f"{ap:.3f}"]
        if sweep is not None:
            prf = sweep.per_class_at_best.get(c)
            if prf is None:
                cells += [NA, NA, NA]
            else:
                cells += [f"{prf.precision:.3f}", f"{prf.recall:.3f}", f"{prf.f1:.3f}"]
        writer.writerow(cells)
    return out.getvalue()
