"""
Confusion-matrix IoU, confidence histograms and the evaluation report.
"""
import csv

import numpy as np
import pytest

from src.errors import DataFileError, ShapeError, ValidationError
from src.evaluation.metrics import (
    ConfidenceHistogram,
    ConfusionMatrix,
    accumulate,
    confidence_report,
    miou,
    overconfident_error_fraction,
)
from src.evaluation.report import evaluate
from src.imaging.types import IGNORE_ID
from src.learning.model import init_params, save_checkpoint


def _brute_force_miou(preds, gts, k):
    pred = np.concatenate([p.ravel() for p in preds])
    gt = np.concatenate([g.ravel() for g in gts])
    keep = gt != IGNORE_ID
    pred, gt = pred[keep], gt[keep]
    ious = []
    for c in range(k):
        union = np.sum((pred == c) | (gt == c))
        if union:
            ious.append(np.sum((pred == c) & (gt == c)) / union)
    return float(np.mean(ious))


class TestConfusion:

    def test_perfect_prediction_is_diagonal(self, rng):
        gt = rng.integers(0, 4, size=(6, 6)).astype(np.uint8)
        cm = accumulate(gt, gt, ConfusionMatrix.empty(4))
        assert np.count_nonzero(cm.counts - np.diag(np.diag(cm.counts))) == 0
        assert cm.total == 36

    def test_ignored_ground_truth_is_skipped(self, rng):
        gt = np.full((3, 3), IGNORE_ID, dtype=np.uint8)
        cm = accumulate(rng.integers(0, 3, size=(3, 3)), gt, ConfusionMatrix.empty(3))
        assert cm.total == 0

    def test_hand_count(self):
        gt = np.array([[0, 1], [1, 1]], dtype=np.uint8)
        pred = np.array([[0, 0], [1, 1]], dtype=np.uint8)
        cm = accumulate(pred, gt, ConfusionMatrix.empty(2))
        np.testing.assert_array_equal(cm.counts, [[1, 0], [1, 2]])

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            accumulate(np.array([[3]]), np.array([[0]], dtype=np.uint8), ConfusionMatrix.empty(2))

    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            accumulate(np.zeros((2, 2)), np.zeros((2, 3), dtype=np.uint8), ConfusionMatrix.empty(2))


class TestMiou:

    def test_perfect(self, rng):
        gt = rng.integers(0, 3, size=(5, 5)).astype(np.uint8)
        per_class, mean = miou(accumulate(gt, gt, ConfusionMatrix.empty(3)))
        assert mean == 1.0
        assert all(v in (None, 1.0) for v in per_class)

    def test_disjoint_class(self):
        gt = np.array([[0, 0]], dtype=np.uint8)
        pred = np.array([[1, 1]], dtype=np.uint8)
        per_class, _ = miou(accumulate(pred, gt, ConfusionMatrix.empty(2)))
        assert per_class == [0.0, 0.0]

    def test_two_class_toy(self):
        gt = np.array([[0, 0, 1, 1]], dtype=np.uint8)
        pred = np.array([[0, 1, 1, 1]], dtype=np.uint8)
        per_class, mean = miou(accumulate(pred, gt, ConfusionMatrix.empty(2)))
        assert per_class == pytest.approx([0.5, 2 / 3])
        assert mean == pytest.approx(0.583333, abs=1e-6)

    def test_absent_class_excluded(self):
        gt = np.array([[0, 1]], dtype=np.uint8)
        per_class, mean = miou(accumulate(gt, gt, ConfusionMatrix.empty(3)))
        assert per_class[2] is None
        assert mean == 1.0

    def test_all_absent(self):
        with pytest.raises(ValidationError):
            miou(ConfusionMatrix.empty(3))

    def test_incremental_matches_brute_force(self, rng):
        for _ in range(50):
            k = int(rng.integers(2, 6))
            h, w = rng.integers(1, 10, size=2)
            preds = [rng.integers(0, k, size=(h, w)) for _ in range(3)]
            gts = [rng.integers(0, k, size=(h, w)).astype(np.uint8) for _ in range(3)]
            gts[0][0, 0] = IGNORE_ID
            cm = ConfusionMatrix.empty(k)
            for p, g in zip(preds, gts):
                cm = accumulate(p, g, cm)
            _, mean = miou(cm)
            assert mean == pytest.approx(_brute_force_miou(preds, gts, k), rel=1e-12)


class TestConfidence:

    def test_uniform_logits_fill_one_bin(self):
        hist = confidence_report([np.zeros((4, 4, 5))], [np.zeros((4, 4), dtype=np.uint8)])
        assert np.count_nonzero(hist.counts_all) == 1
        assert hist.counts_all.sum() == 16
        assert hist.counts_all[int(0.2 * 20)] == 16

    def test_perfect_predictions_have_no_errors(self, rng):
        gt = rng.integers(0, 3, size=(6, 6)).astype(np.uint8)
        logits = 30.0 * np.eye(3)[gt]
        hist = confidence_report([logits], [gt])
        assert hist.counts_erroneous.sum() == 0
        assert hist.counts_all[-1] == 36

    def test_known_error_share_in_top_bin(self):
        gt = np.zeros((10, 10), dtype=np.uint8)
        logits = np.zeros((10, 10, 2))
        logits[..., 0] = 6.0
        logits[:3, :, 0], logits[:3, :, 1] = 0.0, 6.0
        hist = confidence_report([logits], [gt])
        assert hist.counts_erroneous[-1] == 30
        assert hist.counts_all[-1] == 100
        assert overconfident_error_fraction(hist) == 1.0

    def test_totals_and_bounds(self, rng):
        logits = [rng.normal(scale=3.0, size=(8, 8, 4)) for _ in range(3)]
        gts = [rng.integers(0, 4, size=(8, 8)).astype(np.uint8) for _ in range(3)]
        gts[1][:2] = IGNORE_ID
        hist = confidence_report(logits, gts)
        assert hist.counts_all.sum() == 3 * 64 - 16
        assert np.all(hist.counts_erroneous <= hist.counts_all)
        assert 0.0 <= overconfident_error_fraction(hist) <= 1.0

    def test_no_errors_gives_zero_fraction(self):
        assert overconfident_error_fraction(ConfidenceHistogram.empty()) == 0.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            confidence_report([np.zeros((2, 2, 3))], [np.zeros((3, 2), dtype=np.uint8)])


class TestEvaluate:

    def test_report_is_repeatable(self, tiny_dataset, tmp_path, rng):
        ckpt = tmp_path / 'ckpt.bin'
        save_checkpoint(ckpt, init_params(5, 8, rng))
        images = tiny_dataset / 'target' / 'images'
        labels = tiny_dataset / 'target_eval' / 'labels'
        first = evaluate(ckpt, images, labels, tmp_path / 'a.csv')
        evaluate(ckpt, images, labels, tmp_path / 'b.csv')
        assert (tmp_path / 'a.csv').read_bytes() == (tmp_path / 'b.csv').read_bytes()
        assert 0.0 <= first.miou <= 1.0
        assert first.pixels == 4 * 16 * 16

        with open(tmp_path / 'a.csv', newline='') as fh:
            rows = list(csv.DictReader(fh))
        sections = {r['section'] for r in rows}
        assert sections == {'iou', 'miou', 'overconfidence', 'hist_all', 'hist_erroneous'}
        assert sum(int(r['value']) for r in rows if r['section'] == 'hist_all') == first.pixels

    def test_empty_image_dir(self, tmp_path, rng):
        ckpt = tmp_path / 'ckpt.bin'
        save_checkpoint(ckpt, init_params(5, 8, rng))
        (tmp_path / 'images').mkdir()
        with pytest.raises(DataFileError):
            evaluate(ckpt, tmp_path / 'images', tmp_path, tmp_path / 'out.csv')
