"""Voting ensembles: random forest (no bootstrap) and bagging."""

from functools import partial
from typing import Tuple

import numpy as np

from app.configs.params import EnsembleKind, EnsembleParams
from app.learners.model import TreeEnsembleModel
from app.learners.tree import Tree, train_tree
from app.logging_config import get_logger
from app.utils.parallel import parallel_map
from app.utils.seeding import derive_seed, make_rng

logger = get_logger(__name__)


def encode_labels(y: np.ndarray) -> Tuple[Tuple[int, ...], np.ndarray]:
    """Distinct classes (ascending) and y re-expressed as indices into them.

    Raises:
        ValueError: If fewer than two classes are present.
    """
    classes, encoded = np.unique(np.asarray(y, dtype=np.intp), return_inverse=True)
    if classes.shape[0] < 2:
        raise ValueError(f"Training needs at least two classes, got {classes.shape[0]}")
    return tuple(int(c) for c in classes), encoded.astype(np.intp)


def bootstrap_indices(n_samples: int, seed: int, estimator: int) -> np.ndarray:
    """Resample of size n_samples drawn with replacement for one estimator."""
    return make_rng(seed, "bootstrap", estimator).integers(0, n_samples, size=n_samples)


def _fit_tree(index: int, X: np.ndarray, y: np.ndarray, params: EnsembleParams, n_classes: int) -> Tree:
    tree_params = params.tree.model_copy(update={"seed": derive_seed(params.seed, "tree", index)})
    return train_tree(X, y, tree_params, n_classes=n_classes)


def _fit_bagged(index: int, X: np.ndarray, y: np.ndarray, params: EnsembleParams, n_classes: int) -> list:
    if params.bootstrap:
        rows = bootstrap_indices(X.shape[0], params.seed, index)
        X, y = X[rows], y[rows]
    if params.base_estimator == "tree":
        return [_fit_tree(index, X, y, params, n_classes)]
    seed = derive_seed(params.seed, "estimator", index)
    inner = params.model_copy(update={"seed": seed})
    return [_fit_tree(j, X, y, inner, n_classes) for j in range(params.base_forest_size)]


def train_random_forest(X: np.ndarray, y: np.ndarray, params: EnsembleParams, workers: int = 1) -> TreeEnsembleModel:
    """Majority-vote forest of ``n_estimators`` trees.

    Without bootstrap every tree sees the full sample; randomness then comes
    only from the per-split feature sampling of ``params.tree``. Each tree
    draws its seed from the master seed and its index, so the forest is the
    same for any worker count.
    """
    classes, encoded = encode_labels(y)
    X = np.asarray(X, dtype=np.float64)
    logger.info(f"Training random forest: {params.n_estimators} trees on {X.shape[0]} samples x {X.shape[1]} features")

    if params.bootstrap:
        single_tree = params.model_copy(update={"base_estimator": "tree"})
        fit = partial(_fit_bagged, X=X, y=encoded, params=single_tree, n_classes=len(classes))
        trees = [group[0] for group in parallel_map(fit, range(params.n_estimators), workers)]
    else:
        fit = partial(_fit_tree, X=X, y=encoded, params=params, n_classes=len(classes))
        trees = parallel_map(fit, range(params.n_estimators), workers)
    return TreeEnsembleModel(
        kind=EnsembleKind.RANDOM_FOREST,
        classes=classes,
        n_features=X.shape[1],
        params=params,
        trees=trees,
        weights=tuple(1.0 for _ in trees),
    )


def train_bagging(X: np.ndarray, y: np.ndarray, params: EnsembleParams, workers: int = 1) -> TreeEnsembleModel:
    """Majority vote over base estimators fitted on bootstrap resamples.

    The base estimator is a single tree or, with ``base_estimator="forest"``,
    a small forest of ``base_forest_size`` trees that votes internally first.
    """
    classes, encoded = encode_labels(y)
    X = np.asarray(X, dtype=np.float64)
    logger.info(
        f"Training bagging: {params.n_estimators} {params.base_estimator} estimators "
        f"({'bootstrap' if params.bootstrap else 'full sample'}) on {X.shape[0]} samples"
    )

    fit = partial(_fit_bagged, X=X, y=encoded, params=params, n_classes=len(classes))
    groups = parallel_map(fit, range(params.n_estimators), workers)
    trees = [tree for group in groups for tree in group]
    return TreeEnsembleModel(
        kind=EnsembleKind.BAGGING,
        classes=classes,
        n_features=X.shape[1],
        params=params,
        trees=trees,
        weights=tuple(1.0 for _ in trees),
        group_size=len(groups[0]),
    )
