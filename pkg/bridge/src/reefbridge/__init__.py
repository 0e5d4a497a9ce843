"""Bridge between detector runtimes and the reefeval interchange formats."""

from .backends import DetectorBackend, Detection, UltralyticsBackend, load_backend_factory
from .export import (
    BridgeConfig,
    ExportSummary,
    discover_images,
    export_predictions,
    export_training_metrics,
)

__all__ = [
    "BridgeConfig",
    "Detection",
    "DetectorBackend",
    "ExportSummary",
    "UltralyticsBackend",
    "discover_images",
    "export_predictions",
    "export_training_metrics",
    "load_backend_factory",
]

__version__ = "0.1.0"
