"""From-scratch decision trees and the four tree-ensemble classifiers."""

import numpy as np

from app.configs.params import EnsembleKind, EnsembleParams
from app.learners.adaboost import samme_alpha, train_adaboost
from app.learners.boosting import log_loss, train_gradient_boosting
from app.learners.forest import bootstrap_indices, encode_labels, train_bagging, train_random_forest
from app.learners.model import (
    ModelFormatError,
    TreeEnsembleModel,
    load_model,
    predict,
    predict_proba,
    save_model,
)
from app.learners.tree import Tree, train_boosting_tree, train_tree

_TRAINERS = {
    EnsembleKind.RANDOM_FOREST: train_random_forest,
    EnsembleKind.BAGGING: train_bagging,
    EnsembleKind.ADABOOST: train_adaboost,
    EnsembleKind.GRADIENT_BOOSTING: train_gradient_boosting,
}


def train(X: np.ndarray, y: np.ndarray, params: EnsembleParams, workers: int = 1) -> TreeEnsembleModel:
    """Train the ensemble kind named by ``params.kind``."""
    return _TRAINERS[EnsembleKind(params.kind)](X, y, params, workers=workers)


__all__ = [
    "ModelFormatError",
    "Tree",
    "TreeEnsembleModel",
    "bootstrap_indices",
    "encode_labels",
    "load_model",
    "log_loss",
    "predict",
    "predict_proba",
    "samme_alpha",
    "save_model",
    "train",
    "train_adaboost",
    "train_bagging",
    "train_boosting_tree",
    "train_gradient_boosting",
    "train_random_forest",
    "train_tree",
]
