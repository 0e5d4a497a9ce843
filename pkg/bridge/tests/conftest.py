from pathlib import Path


class FakeBackend:
    """Deterministic stand-in runtime: detections looked up by image stem."""

    def __init__(self, by_stem, class_names=("damselfish", "wrasse")):
        self.class_names = class_names
        self._by_stem = dict(by_stem)

    def detect(self, image_path):
        return list(self._by_stem.get(Path(image_path).stem, ()))


def make_images(root, *names):
    """Create empty image files; fake backends never open them."""
    root.mkdir(parents=True, exist_ok=True)
    for name in names:
        (root / name).touch()
    return root


RESULTS_HEADER = (
    "                  epoch,      train/box_loss,"
    "      metrics/precision(B),         metrics/recall(B),"
    "       metrics/mAP50(B),    metrics/mAP50-95(B),              lr/pg0"
)


def results_row(epoch, precision, recall, map50, map5095, box_loss=1.2, lr=0.0032):
    return (
        f"{epoch:>23},{box_loss:>20},{precision:>26},{recall:>26},"
        f"{map50:>23},{map5095:>23},{lr:>20}"
    )


def write_results(run_dir, rows):
    """An ultralytics-style results.csv: padded cells, one row per epoch."""
    run_dir.mkdir(parents=True, exist_ok=True)
    text = "\n".join([RESULTS_HEADER, *rows]) + "\n"
    (run_dir / "results.csv").write_text(text)
    return run_dir
