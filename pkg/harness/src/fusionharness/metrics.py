"""Multi-class classification metrics computed from a confusion matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LABELS = ("normal", "pneumonia", "covid19")


@dataclass(frozen=True)
class MetricsReport:
    """Overall accuracy, per-class precision/recall/F1 and the raw counts.

    ``confusion[i][j]`` counts samples of true class i predicted as class j,
    so row sums are the per-class test counts and accuracy is trace/total.
    """

    accuracy: float
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1: tuple[float, ...]
    confusion: tuple[tuple[int, ...], ...]

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": {
                label: {"precision": p, "recall": r, "f1": f}
                for label, p, r, f in zip(LABELS, self.precision, self.recall, self.f1)
            },
            "confusion": [list(row) for row in self.confusion],
        }


def confusion_matrix(y_true, y_pred, num_classes: int = 3) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=np.intp)
    y_pred = np.asarray(y_pred, dtype=np.intp)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"label shapes differ: {y_true.shape} vs {y_pred.shape}")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def report_from_confusion(cm: np.ndarray) -> MetricsReport:
    cm = np.asarray(cm, dtype=np.int64)
    total = cm.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    diag = np.diag(cm).astype(np.float64)
    pred_totals = cm.sum(axis=0).astype(np.float64)
    true_totals = cm.sum(axis=1).astype(np.float64)
    # absent classes or empty predictions score 0 rather than dividing by zero
    precision = np.divide(diag, pred_totals, out=np.zeros_like(diag), where=pred_totals > 0)
    recall = np.divide(diag, true_totals, out=np.zeros_like(diag), where=true_totals > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros_like(diag), where=pr > 0)
    return MetricsReport(
        accuracy=float(diag.sum() / total),
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        confusion=tuple(tuple(int(v) for v in row) for row in cm),
    )


def compute_metrics(y_true, y_pred, num_classes: int = 3) -> MetricsReport:
    return report_from_confusion(confusion_matrix(y_true, y_pred, num_classes))
