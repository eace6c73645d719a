import numpy as np
import pytest

from fusionharness.metrics import compute_metrics, confusion_matrix, report_from_confusion


def balanced_labels():
    return np.repeat([0, 1, 2], 10)


class TestConfusion:
    def test_perfect_predictor(self):
        y = balanced_labels()
        report = compute_metrics(y, y)
        assert report.accuracy == 1.0
        assert np.array_equal(report.confusion, np.diag([10, 10, 10]))

    def test_always_class_zero(self):
        y = balanced_labels()
        report = compute_metrics(y, np.zeros_like(y))
        assert report.accuracy == pytest.approx(1 / 3)
        assert report.recall[0] == 1.0
        assert report.precision[0] == pytest.approx(1 / 3)
        assert report.recall[1] == 0.0 and report.recall[2] == 0.0
        assert report.f1[0] == pytest.approx(0.5)
        assert report.f1[1] == 0.0  # undefined precision+recall scored as zero

    def test_rows_sum_to_class_counts(self, rng=np.random.default_rng(3)):
        y = balanced_labels()
        preds = rng.integers(0, 3, size=30)
        cm = confusion_matrix(y, preds)
        assert list(cm.sum(axis=1)) == [10, 10, 10]

    def test_metric_identities(self):
        rng = np.random.default_rng(9)
        y = rng.integers(0, 3, size=200)
        p = rng.integers(0, 3, size=200)
        report = compute_metrics(y, p)
        cm = np.array(report.confusion)
        assert report.accuracy == np.trace(cm) / cm.sum()
        for c in range(3):
            prec = cm[c, c] / cm[:, c].sum() if cm[:, c].sum() else 0.0
            rec = cm[c, c] / cm[c].sum() if cm[c].sum() else 0.0
            f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
            assert abs(report.precision[c] - prec) <= 1e-12
            assert abs(report.recall[c] - rec) <= 1e-12
            assert abs(report.f1[c] - f1) <= 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            report_from_confusion(np.zeros((3, 3), dtype=int))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            confusion_matrix([0, 1], [0])
