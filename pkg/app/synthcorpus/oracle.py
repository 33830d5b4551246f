"""Leave-one-out nearest-centroid classifier used as a lower-bound oracle."""

from typing import Sequence, Union

import numpy as np

from app.dataset import CLASS_ORDER
from app.evaluation.metrics import EvalReport, compute_metrics
from app.features.vectors import FeatureVector, feature_matrix
from app.logging_config import get_logger

logger = get_logger(__name__)


def nearest_centroid_predictions(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Class of the nearest centroid for every sample, its own class centroid computed without it.

    A sample that is the only member of its class cannot be assigned to it.
    Distance ties go to the lowest class position.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    classes = np.unique(y)
    if classes.shape[0] < 2:
        raise ValueError(f"Nearest-centroid oracle needs at least two classes, got {classes.shape[0]}")

    sums = np.vstack([X[y == c].sum(axis=0) for c in classes])
    counts = np.asarray([np.count_nonzero(y == c) for c in classes], dtype=np.float64)
    centroids = sums / counts[:, None]
    distances = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)

    own = np.searchsorted(classes, y)
    rows = np.arange(X.shape[0])
    remaining = counts[own] - 1.0
    loo_centroids = (sums[own] - X) / np.where(remaining > 0, remaining, 1.0)[:, None]
    own_distance = ((X - loo_centroids) ** 2).sum(axis=1)
    distances[rows, own] = np.where(remaining > 0, own_distance, np.inf)
    return classes[np.argmin(distances, axis=1)]


def nearest_centroid_oracle(features: Union[Sequence[FeatureVector], np.ndarray], y=None) -> EvalReport:
    """Leave-one-out nearest-centroid report over feature vectors (or an (X, y) pair)."""
    if y is None:
        X, y = feature_matrix(list(features))
    else:
        X, y = np.asarray(features, dtype=np.float64), np.asarray(y, dtype=np.intp)
    predicted = nearest_centroid_predictions(X, y)
    classes = tuple(CLASS_ORDER[p] for p in np.unique(y))
    report = compute_metrics(y, predicted, classes).with_details(oracle="nearest-centroid-loo")
    logger.info(f"Nearest-centroid oracle: weighted F1 {report.weighted_f1:.4f} on {X.shape[0]} samples")
    return report
