"""Softmax gradient boosting with second-order (Newton) trees."""

import math

import numpy as np

from app.configs.params import EnsembleKind, EnsembleParams
from app.learners.forest import encode_labels
from app.learners.model import TreeEnsembleModel, softmax
from app.learners.tree import train_boosting_tree
from app.logging_config import get_logger
from app.utils.seeding import derive_seed

logger = get_logger(__name__)

HESSIAN_FLOOR = 1e-16


def log_loss(probabilities: np.ndarray, encoded: np.ndarray) -> float:
    """Mean negative log-likelihood of the true classes."""
    picked = probabilities[np.arange(encoded.shape[0]), encoded]
    return float(-np.mean(np.log(np.maximum(picked, np.finfo(np.float64).tiny))))


def train_gradient_boosting(
    X: np.ndarray, y: np.ndarray, params: EnsembleParams, workers: int = 1
) -> TreeEnsembleModel:
    """Fit one tree per class per stage on the softmax log-loss.

    Every class starts from the raw score ln(base_score), so the initial
    softmax is uniform. Each stage fits trees to g = p - y and
    h = 2 p (1 - p) and adds their leaf weights scaled by the learning rate.
    The training log-loss after every stage is kept in ``train_loss``.
    """
    classes, encoded = encode_labels(y)
    X = np.asarray(X, dtype=np.float64)
    n_samples, n_classes = X.shape[0], len(classes)
    logger.info(
        f"Training gradient boosting: {params.n_estimators} stages x {n_classes} classes on {n_samples} samples"
    )

    targets = np.zeros((n_samples, n_classes))
    targets[np.arange(n_samples), encoded] = 1.0
    init_score = math.log(params.base_score)
    scores = np.full((n_samples, n_classes), init_score)

    trees, losses = [], []
    for stage in range(params.n_estimators):
        probabilities = softmax(scores)
        updates = np.zeros_like(scores)
        for k in range(n_classes):
            p = probabilities[:, k]
            grad = p - targets[:, k]
            hess = np.maximum(2.0 * p * (1.0 - p), HESSIAN_FLOOR)
            tree_params = params.tree.model_copy(update={"seed": derive_seed(params.seed, "stage", stage, k)})
            tree = train_boosting_tree(X, grad, hess, tree_params)
            updates[:, k] = tree.predict_value(X)[:, 0]
            trees.append(tree)
        scores += params.learning_rate * updates
        losses.append(log_loss(softmax(scores), encoded))
        logger.debug(f"Gradient boosting stage {stage}: train log-loss {losses[-1]:.6f}")

    return TreeEnsembleModel(
        kind=EnsembleKind.GRADIENT_BOOSTING,
        classes=classes,
        n_features=X.shape[1],
        params=params,
        trees=trees,
        learning_rate=params.learning_rate,
        init_score=init_score,
        train_loss=tuple(losses),
    )
