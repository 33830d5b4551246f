"""Classification metrics and the evaluation report."""

from dataclasses import dataclass, field
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np
from sklearn.metrics import confusion_matrix, precision_recall_fscore_support

from app.dataset import CLASS_ORDER, ClassLabel

LabelLike = Union[ClassLabel, int]


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Confusion matrix (rows = true class) and derived metrics.

    Precision is 0 for a class that is never predicted, F1 is 0 when both
    precision and recall are 0. Weighted averages use true-class support.
    """

    classes: Tuple[ClassLabel, ...]
    confusion: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    support: np.ndarray
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    accuracy: float
    folds: Tuple["EvalReport", ...] = ()
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return int(self.support.sum())

    def with_details(self, folds: Sequence["EvalReport"] = (), **metadata: Any) -> "EvalReport":
        """Copy carrying per-fold reports and extra metadata."""
        merged = {**self.metadata, **metadata}
        return EvalReport(
            self.classes,
            self.confusion,
            self.precision,
            self.recall,
            self.f1,
            self.support,
            self.weighted_precision,
            self.weighted_recall,
            self.weighted_f1,
            self.accuracy,
            tuple(folds) or self.folds,
            merged,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "classes": [c.value for c in self.classes],
            "confusion": self.confusion.tolist(),
            "precision": self.precision.tolist(),
            "recall": self.recall.tolist(),
            "f1": self.f1.tolist(),
            "support": self.support.tolist(),
            "weighted_precision": self.weighted_precision,
            "weighted_recall": self.weighted_recall,
            "weighted_f1": self.weighted_f1,
            "accuracy": self.accuracy,
            "folds": [fold.to_dict() for fold in self.folds],
            "metadata": self.metadata,
        }


def _positions(values: Sequence[LabelLike]) -> np.ndarray:
    return np.asarray([v.position if isinstance(v, ClassLabel) else int(v) for v in values], dtype=np.intp)


def compute_metrics(
    y_true: Sequence[LabelLike], y_pred: Sequence[LabelLike], classes: Sequence[ClassLabel] = CLASS_ORDER
) -> EvalReport:
    """Metrics of predictions against truth over a class list.

    Labels are ClassLabel members or their canonical positions.

    Raises:
        ValueError: On empty or unequal inputs, or a label outside the class list.
    """
    truth, predicted = _positions(y_true), _positions(y_pred)
    if truth.shape[0] == 0 or truth.shape != predicted.shape:
        raise ValueError(f"Need equal non-empty label sequences, got {truth.shape[0]} and {predicted.shape[0]}")
    classes = tuple(ClassLabel(c) for c in classes)
    positions = [c.position for c in classes]
    unknown = set(np.concatenate([truth, predicted]).tolist()) - set(positions)
    if unknown:
        names = ", ".join(CLASS_ORDER[u].value if 0 <= u < len(CLASS_ORDER) else str(u) for u in sorted(unknown))
        raise ValueError(f"Labels outside the class list: {names}")

    confusion = confusion_matrix(truth, predicted, labels=positions)
    precision, recall, f1, support = precision_recall_fscore_support(
        truth, predicted, labels=positions, zero_division=0
    )
    w_precision, w_recall, w_f1, _ = precision_recall_fscore_support(
        truth, predicted, labels=positions, average="weighted", zero_division=0
    )
    return EvalReport(
        classes=classes,
        confusion=confusion.astype(np.int64),
        precision=np.asarray(precision, dtype=np.float64),
        recall=np.asarray(recall, dtype=np.float64),
        f1=np.asarray(f1, dtype=np.float64),
        support=np.asarray(support, dtype=np.int64),
        weighted_precision=float(w_precision),
        weighted_recall=float(w_recall),
        weighted_f1=float(w_f1),
        accuracy=float(np.trace(confusion) / confusion.sum()),
        metadata={"zero_division": 0},
    )
