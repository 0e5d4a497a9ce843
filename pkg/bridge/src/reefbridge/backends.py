"""Detector backends: anything that can turn an image path into boxes.

A backend is structural — ``class_names`` plus ``detect`` — so tests and
other runtimes can drop in their own. The bundled one wraps ultralytics
and is imported lazily: the package works (and the metrics exporter runs)
without ultralytics installed.
"""

from __future__ import annotations

import importlib
from pathlib import Path
from typing import Protocol, Sequence

# (class_id, x1, y1, x2, y2, score) in pixel corner coordinates
Detection = tuple[int, float, float, float, float, float]


class DetectorBackend(Protocol):
    """What export_predictions needs from a model runtime."""

    class_names: Sequence[str]

    def detect(self, image_path: Path) -> Sequence[Detection]:
        """All raw detections for one image, unfiltered."""
        ...


class UltralyticsBackend:
    """YOLO-family models loaded through the ultralytics runtime.

    Inference runs with the runtime's confidence gate opened (conf=0.0) so
    the caller's score floor is the only filter; the NMS IoU is whatever
    the factory was given.
    """

    def __init__(self, weights: str, nms_iou: float = 0.7):
        try:
            from ultralytics import YOLO
        except ImportError:
            raise RuntimeError(
                "ultralytics is not installed; pip install 'reefeval-bridge[yolo]'"
            ) from None
        self._model = YOLO(str(weights))
        self._nms_iou = nms_iou
        names = self._model.names  # {class_id: name}
        self.class_names = tuple(names[i] for i in sorted(names))

    def detect(self, image_path: Path) -> list[Detection]:
        results = self._model.predict(
            str(image_path), conf=0.0, iou=self._nms_iou, verbose=False
        )
        detections: list[Detection] = []
        for result in results:
            for box in result.boxes:
                x1, y1, x2, y2 = (float(v) for v in box.xyxy[0].tolist())
                detections.append(
                    (int(box.cls.item()), x1, y1, x2, y2, float(box.conf.item()))
                )
        return detections


def ultralytics_backend(weights: str, nms_iou: float) -> UltralyticsBackend:
    """Default backend factory used by the CLI."""
    return UltralyticsBackend(weights, nms_iou)


def load_backend_factory(spec: str):
    """Resolve a ``module:attribute`` string to a backend factory.

    The factory is called as ``factory(weights, nms_iou)`` and must return
    a DetectorBackend.
    """
    module_name, sep, attr = spec.partition(":")
    if not sep or not module_name or not attr:
        raise ValueError(f"backend spec {spec!r} is not of the form module:attribute")
    try:
        module = importlib.import_module(module_name)
    except ImportError as exc:
        raise ValueError(f"cannot import backend module {module_name!r}: {exc}") from None
    try:
        return getattr(module, attr)
    except AttributeError:
        raise ValueError(f"module {module_name!r} has no attribute {attr!r}") from None
