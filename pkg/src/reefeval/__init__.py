"""Curation and detection-evaluation toolkit for reef-fish transect surveys.

The package covers the full small-survey pipeline: plan which video frames to
annotate, curate the labeled dataset (family selection, size filters, splits),
and score detector output (AP/mAP, F1-optimal confidence sweeps, report
tables).
"""

from .curation import (
    CuratedDataset,
    CurationPlan,
    RuleViolation,
    ValidationReport,
    curate_preset,
    filter_min_area,
    remap_classes,
    top_k_families,
    validate_annotation_rules,
)
from .errors import ParseError
from .frames import FrameManifest, emit_extraction_commands, plan_frames
from .io import (
    atomic_write_text,
    canonicalize_labels,
    load_class_map,
    load_dataset,
    load_predictions,
    parse_class_map,
    parse_label_file,
    parse_predictions,
    save_dataset,
    serialize_class_map,
    serialize_label_file,
)
from .matching import MatchResult, Verdict, iou, match_detections, merge_matches
from .metrics import (
    ApResult,
    ClassPRF,
    PRCurve,
    SweepPoint,
    ThresholdSweepResult,
    average_precision,
    f1_sweep,
    map_at,
    map_range,
    matches_per_class,
    pr_curve,
)
from .report import (
    ConfigMetrics,
    parse_comparison_csv,
    render_comparison_csv,
    render_comparison_table,
    render_family_histogram,
    render_per_class_report,
)
from .splits import SplitAssignment, k_fold, largest_remainder, split
from .types import (
    Dataset,
    FamilyClassMap,
    FamilyCount,
    FamilyHistogram,
    GroundTruthBox,
    ImageRecord,
    PixelBox,
    Prediction,
    PredictionSet,
    dataset_stats,
)

__version__ = "0.1.0"

__all__ = [
    "ApResult",
    "ClassPRF",
    "ConfigMetrics",
    "CuratedDataset",
    "CurationPlan",
    "Dataset",
    "FamilyClassMap",
    "FamilyCount",
    "FamilyHistogram",
    "FrameManifest",
    "GroundTruthBox",
    "ImageRecord",
    "MatchResult",
    "ParseError",
    "PixelBox",
    "PRCurve",
    "Prediction",
    "PredictionSet",
    "RuleViolation",
    "SplitAssignment",
    "SweepPoint",
    "ThresholdSweepResult",
    "ValidationReport",
    "Verdict",
    "atomic_write_text",
    "average_precision",
    "canonicalize_labels",
    "curate_preset",
    "dataset_stats",
    "emit_extraction_commands",
    "f1_sweep",
    "filter_min_area",
    "iou",
    "k_fold",
    "largest_remainder",
    "load_class_map",
    "load_dataset",
    "load_predictions",
    "map_at",
    "map_range",
    "match_detections",
    "matches_per_class",
    "merge_matches",
    "parse_class_map",
    "parse_comparison_csv",
    "parse_label_file",
    "parse_predictions",
    "plan_frames",
    "pr_curve",
    "remap_classes",
    "render_comparison_csv",
    "render_comparison_table",
    "render_family_histogram",
    "render_per_class_report",
    "save_dataset",
    "serialize_class_map",
    "serialize_label_file",
    "split",
    "top_k_families",
    "validate_annotation_rules",
]
