"""Multi-class AdaBoost (SAMME) over weighted decision trees."""

import math
from typing import Callable, Optional

import numpy as np

from app.configs.params import EnsembleKind, EnsembleParams
from app.learners.forest import encode_labels
from app.learners.model import TreeEnsembleModel
from app.learners.tree import train_tree
from app.logging_config import get_logger
from app.utils.seeding import derive_seed

logger = get_logger(__name__)

ERROR_CLAMP = 1e-10

# Called after every accepted round with (round index, sample weights used for that round)
RoundMonitor = Callable[[int, np.ndarray], None]


def samme_alpha(error: float, n_classes: int, learning_rate: float) -> float:
    """Stage weight lr * (ln((1 - err) / err) + ln(K - 1)) with err clamped away from 0 and 1."""
    err = min(max(error, ERROR_CLAMP), 1.0 - ERROR_CLAMP)
    return learning_rate * (math.log((1.0 - err) / err) + math.log(n_classes - 1))


def train_adaboost(
    X: np.ndarray,
    y: np.ndarray,
    params: EnsembleParams,
    workers: int = 1,
    monitor: Optional[RoundMonitor] = None,
) -> TreeEnsembleModel:
    """Boost ``n_estimators`` trees, reweighting misclassified samples each round.

    A round whose weighted error reaches 1 - 1/K ends training and is dropped.
    A round with zero error is kept and ends training. Rounds are sequential,
    so ``workers`` is accepted for interface symmetry only.

    Raises:
        ValueError: If the first tree is no better than chance.
    """
    classes, encoded = encode_labels(y)
    X = np.asarray(X, dtype=np.float64)
    n_samples, n_classes = X.shape[0], len(classes)
    chance_error = 1.0 - 1.0 / n_classes
    logger.info(f"Training AdaBoost: up to {params.n_estimators} rounds on {n_samples} samples, K={n_classes}")

    weights = np.full(n_samples, 1.0 / n_samples)
    scores = np.zeros((n_samples, n_classes))
    rows = np.arange(n_samples)
    trees, alphas, stage_errors, ensemble_errors = [], [], [], []
    for round_index in range(params.n_estimators):
        tree_params = params.tree.model_copy(update={"seed": derive_seed(params.seed, "tree", round_index)})
        tree = train_tree(X, encoded, tree_params, n_classes=n_classes, sample_weight=weights)
        predicted = tree.predict(X)
        miss = predicted != encoded
        error = float(weights[miss].sum() / weights.sum())

        if error >= chance_error:
            if round_index == 0:
                raise ValueError(
                    f"AdaBoost base tree is no better than chance (weighted error {error:.4f} >= {chance_error:.4f})"
                )
            logger.info(f"AdaBoost stopped at round {round_index}: weighted error {error:.4f} reached chance level")
            break

        alpha = samme_alpha(error, n_classes, params.learning_rate)
        if monitor is not None:
            monitor(round_index, weights.copy())
        trees.append(tree)
        alphas.append(alpha)
        stage_errors.append(error)
        scores[rows, predicted] += alpha
        ensemble_errors.append(float(np.mean(np.argmax(scores, axis=1) != encoded)))
        logger.debug(f"AdaBoost round {round_index}: error={error:.6f} alpha={alpha:.6f}")

        if error == 0.0:
            logger.info(f"AdaBoost stopped at round {round_index}: perfect fit")
            break
        weights = weights * np.exp(alpha * miss)
        weights /= weights.sum()

    return TreeEnsembleModel(
        kind=EnsembleKind.ADABOOST,
        classes=classes,
        n_features=X.shape[1],
        params=params,
        trees=trees,
        weights=tuple(alphas),
        learning_rate=params.learning_rate,
        stage_errors=tuple(stage_errors),
        ensemble_errors=tuple(ensemble_errors),
    )
