"""Bridge release criteria, checked against the primary toolkit itself.

These tests import reefeval on purpose: its parser is the conformance
oracle for everything the bridge writes. Each criterion prints an
``ACCEPTANCE <name>: PASS`` line (run with ``pytest -v -s``).
"""

import random

import pytest

from reefeval import parse_predictions, render_comparison_csv
from reefeval.report import ConfigMetrics

from conftest import FakeBackend, make_images, results_row, write_results
from reefbridge import BridgeConfig, export_predictions, export_training_metrics


def random_backend_run(seed):
    """Messy detections on purpose: inverted corners, out-of-range scores."""
    rng = random.Random(seed)
    stems = [f"frame{i:03d}" for i in range(rng.randint(0, 6))]
    by_stem = {}
    for stem in stems:
        detections = []
        for _ in range(rng.randint(0, 8)):
            x1 = rng.uniform(0, 600)
            y1 = rng.uniform(0, 400)
            x2 = x1 + rng.uniform(-20, 200)  # sometimes inverted or flat
            y2 = y1 + rng.uniform(-20, 200)
            score = rng.uniform(-0.2, 1.2)  # sometimes outside [0, 1]
            detections.append((rng.randrange(5), x1, y1, x2, y2, score))
        by_stem[stem] = detections
    floor = rng.choice((0.0, 0.3, 1.0))
    return stems, FakeBackend(by_stem), floor


def test_bridge_conformance(tmp_path):
    """Whatever the backend throws at it, the output parses on the other side."""
    parsed_total = 0
    for seed in range(50):
        stems, backend, floor = random_backend_run(seed)
        images = make_images(tmp_path / f"imgs{seed}", *(f"{s}.jpg" for s in stems))
        out = tmp_path / f"preds{seed}.jsonl"
        summary = export_predictions(
            BridgeConfig("best.pt", images, out, score_floor=floor), backend
        )
        predictions = parse_predictions(out.read_text())
        assert len(predictions) == summary.n_records
        for p in predictions:
            assert p.image_id in stems
            assert 0.0 <= p.score <= 1.0
            assert p.score >= floor
            assert p.x1 < p.x2 and p.y1 < p.y2
        parsed_total += len(predictions)
    # the trivial boundary files parse too
    empty_out = tmp_path / "empty.jsonl"
    export_predictions(
        BridgeConfig("best.pt", make_images(tmp_path / "none"), empty_out),
        FakeBackend({}),
    )
    assert len(parse_predictions(empty_out.read_text())) == 0
    print(
        f"ACCEPTANCE bridge-conformance: PASS "
        f"(50 runs, {parsed_total} records re-parsed by the toolkit)"
    )


def test_bridge_metrics_row(tmp_path):
    """The fixture trainer summary reproduces the scratch-tuned table row."""
    run = write_results(
        tmp_path / "run",
        [
            results_row(0, 0.52341, 0.33102, 0.41023, 0.24011),
            results_row(1, 0.703, 0.401, 0.490, 0.320),
        ],
    )
    record = export_training_metrics(run, "Scratch-tuned", "Top 10, >=500 px^2")
    row = ConfigMetrics.from_dict(record)
    assert row == ConfigMetrics(
        "Scratch-tuned", "Top 10, >=500 px^2", 0.703, 0.401, 0.490, 0.320
    )
    csv_line = render_comparison_csv([row]).splitlines()[1]
    assert csv_line.rsplit(",", 4)[1:] == ["0.703", "0.401", "0.490", "0.320"]
    assert row.precision == pytest.approx(0.703, abs=5e-4)
    print("ACCEPTANCE bridge-metrics-row: PASS (0.703/0.401/0.490/0.320)")
