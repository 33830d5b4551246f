"""Fitted tree-ensemble models: prediction and the versioned JSON model file."""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import ValidationError

from app.configs.params import EnsembleKind, EnsembleParams
from app.learners.tree import Tree
from app.logging_config import get_logger

logger = get_logger(__name__)

MODEL_FORMAT = "stonetype-model"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    """The model file is corrupt or was written by an incompatible version."""


@dataclass(frozen=True, eq=False)
class TreeEnsembleModel:
    """A trained ensemble.

    ``classes`` are the class indices seen in training, ascending; predictions
    are drawn from them. Voting ensembles (random forest, bagging) group their
    trees into estimators of ``group_size`` trees; AdaBoost stores one tree
    per stage with its weight; gradient boosting stores ``len(classes)`` trees
    per stage, stage-major.
    """

    kind: EnsembleKind
    classes: Tuple[int, ...]
    n_features: int
    params: EnsembleParams
    trees: List[Tree]
    weights: Tuple[float, ...] = ()
    group_size: int = 1
    learning_rate: float = 1.0
    init_score: float = 0.0
    train_loss: Tuple[float, ...] = ()
    stage_errors: Tuple[float, ...] = ()
    ensemble_errors: Tuple[float, ...] = ()
    info: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def _check_input(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"Model expects {self.n_features} features, got input of shape {X.shape}")
        return X

    def _vote_fractions(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for start in range(0, len(self.trees), self.group_size):
            group = self.trees[start : start + self.group_size]
            if len(group) == 1:
                choice = group[0].predict(X)
            else:
                inner = np.zeros_like(votes)
                for tree in group:
                    inner[rows, tree.predict(X)] += 1.0
                choice = np.argmax(inner, axis=1)
            votes[rows, choice] += 1.0
        return votes / votes.sum(axis=1, keepdims=True)

    def _weighted_votes(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for tree, alpha in zip(self.trees, self.weights):
            votes[rows, tree.predict(X)] += alpha
        return votes / votes.sum(axis=1, keepdims=True)

    def raw_scores(self, X: np.ndarray) -> np.ndarray:
        """Gradient boosting scores before the softmax."""
        X = self._check_input(X)
        scores = np.full((X.shape[0], self.n_classes), self.init_score)
        for i, tree in enumerate(self.trees):
            scores[:, i % self.n_classes] += self.learning_rate * tree.predict_value(X)[:, 0]
        return scores

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Per-class scores, one probability row per sample, columns in ``classes`` order."""
        X = self._check_input(X)
        if self.kind == EnsembleKind.GRADIENT_BOOSTING:
            return softmax(self.raw_scores(X))
        if self.kind == EnsembleKind.ADABOOST:
            return self._weighted_votes(X)
        return self._vote_fractions(X)

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Predicted class per sample; ties go to the lowest class index."""
        return np.asarray(self.classes, dtype=np.intp)[np.argmax(self.predict_proba(X), axis=1)]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind.value,
            "classes": list(self.classes),
            "n_features": self.n_features,
            "params": self.params.model_dump(mode="json"),
            "trees": [tree.to_dict() for tree in self.trees],
            "weights": list(self.weights),
            "group_size": self.group_size,
            "learning_rate": self.learning_rate,
            "init_score": self.init_score,
            "train_loss": list(self.train_loss),
            "stage_errors": list(self.stage_errors),
            "ensemble_errors": list(self.ensemble_errors),
            "info": self.info,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TreeEnsembleModel":
        """Rebuild a model from its dictionary form.

        Raises:
            ModelFormatError: On a foreign format, a version mismatch or inconsistent content.
        """
        if not isinstance(data, dict) or data.get("format") != MODEL_FORMAT:
            raise ModelFormatError("Not a stonetype model file")
        if data.get("version") != MODEL_VERSION:
            raise ModelFormatError(
                f"Model file version {data.get('version')} is not supported (expected {MODEL_VERSION})"
            )
        try:
            model = cls(
                kind=EnsembleKind(data["kind"]),
                classes=tuple(int(c) for c in data["classes"]),
                n_features=int(data["n_features"]),
                params=EnsembleParams(**data["params"]),
                trees=[Tree.from_dict(tree) for tree in data["trees"]],
                weights=tuple(float(w) for w in data["weights"]),
                group_size=int(data["group_size"]),
                learning_rate=float(data["learning_rate"]),
                init_score=float(data["init_score"]),
                train_loss=tuple(float(v) for v in data["train_loss"]),
                stage_errors=tuple(float(v) for v in data.get("stage_errors", [])),
                ensemble_errors=tuple(float(v) for v in data.get("ensemble_errors", [])),
                info=dict(data.get("info", {})),
            )
            model.check()
        except (KeyError, TypeError, ValueError, ValidationError) as e:
            if isinstance(e, ModelFormatError):
                raise
            raise ModelFormatError(f"Inconsistent model content: {e}") from e
        return model

    def check(self) -> None:
        """Validate structural invariants.

        Raises:
            ModelFormatError: If the model breaks an invariant.
        """
        if not self.trees:
            raise ModelFormatError("Model holds no trees")
        if len(self.classes) < 2 or list(self.classes) != sorted(set(self.classes)):
            raise ModelFormatError("Model classes must be at least two distinct ascending indices")
        for tree in self.trees:
            try:
                tree.check(self.n_features)
            except ValueError as e:
                raise ModelFormatError(str(e)) from e
        if self.kind == EnsembleKind.ADABOOST:
            if len(self.weights) != len(self.trees) or not np.all(np.isfinite(self.weights)):
                raise ModelFormatError("AdaBoost needs one finite weight per tree")
        if self.kind == EnsembleKind.GRADIENT_BOOSTING and len(self.trees) % self.n_classes:
            raise ModelFormatError("Gradient boosting needs one tree per class per stage")


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def predict(model: TreeEnsembleModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)


def predict_proba(model: TreeEnsembleModel, X: np.ndarray) -> np.ndarray:
    return model.predict_proba(X)


def save_model(model: TreeEnsembleModel, path: Path) -> None:
    """Write a model as JSON (sorted keys, exact float round-trip)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(path.name + ".tmp")
    with open(tmp_path, "w", encoding="utf-8") as f:
        json.dump(model.to_dict(), f, sort_keys=True, separators=(",", ":"))
    os.replace(tmp_path, path)
    logger.info(f"Saved {model.kind.value} model with {len(model.trees)} trees to {path}")


def load_model(path: Path) -> TreeEnsembleModel:
    """Read a model file.

    Raises:
        FileNotFoundError: If the file does not exist.
        ModelFormatError: If the file is corrupt or of another version.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Model file not found at {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ModelFormatError(f"Corrupt model file {path}: {e}") from e
    return TreeEnsembleModel.from_dict(data)
