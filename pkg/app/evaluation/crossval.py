"""Cross-validated evaluation, hold-out evaluation and hyperparameter grid search."""

import itertools
from functools import partial
from typing import Any, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from app.configs.params import EnsembleParams
from app.dataset import CLASS_ORDER
from app.evaluation.folds import FoldSplit
from app.evaluation.metrics import EvalReport, compute_metrics
from app.learners import train
from app.logging_config import get_logger
from app.utils.parallel import parallel_map

logger = get_logger(__name__)


def _present_classes(y: np.ndarray):
    return tuple(CLASS_ORDER[p] for p in sorted(set(np.asarray(y).tolist())))


def _fit_fold(fold: int, X: np.ndarray, y: np.ndarray, params: EnsembleParams, folds: FoldSplit) -> np.ndarray:
    train_rows, test_rows = folds.train_test(fold)
    model = train(X[train_rows], y[train_rows], params)
    return model.predict(X[test_rows])


def cross_validate(
    X: np.ndarray,
    y: np.ndarray,
    params: EnsembleParams,
    folds: FoldSplit,
    workers: int = 1,
    **metadata: Any,
) -> EvalReport:
    """Train one model per fold and evaluate it on the held-out fold.

    The returned report pools the held-out predictions of all folds and keeps
    one report per fold. Every fold trains with the same seed, so the pooled
    report does not depend on the order of the folds.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    if folds.n_samples != X.shape[0]:
        raise ValueError(f"Folds cover {folds.n_samples} samples but the feature matrix has {X.shape[0]} rows")
    classes = _present_classes(y)
    logger.info(f"Cross-validating {params.kind.value} over {len(folds)} folds ({X.shape[0]} samples)")

    predictions = parallel_map(partial(_fit_fold, X=X, y=y, params=params, folds=folds), range(len(folds)), workers)
    pooled = np.empty_like(y)
    fold_reports = []
    for fold, predicted in enumerate(predictions):
        test_rows = folds.folds[fold]
        pooled[test_rows] = predicted
        fold_reports.append(compute_metrics(y[test_rows], predicted, classes))

    report = compute_metrics(y, pooled, classes)
    return report.with_details(
        fold_reports,
        kind=params.kind.value,
        params=params.model_dump(mode="json"),
        seed=params.seed,
        k=len(folds),
        grouping=folds.mode.value,
        **metadata,
    )


def holdout_evaluate(
    X: np.ndarray,
    y: np.ndarray,
    params: EnsembleParams,
    train_rows: np.ndarray,
    test_rows: np.ndarray,
    workers: int = 1,
    **metadata: Any,
) -> EvalReport:
    """Train on the training rows and report on the held-out rows."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    model = train(X[train_rows], y[train_rows], params, workers=workers)
    report = compute_metrics(y[test_rows], model.predict(X[test_rows]), _present_classes(y))
    return report.with_details(
        kind=params.kind.value,
        params=params.model_dump(mode="json"),
        seed=params.seed,
        holdout=int(len(test_rows)),
        **metadata,
    )


def _apply_override(params: EnsembleParams, key: str, value: Any) -> EnsembleParams:
    if key.startswith("tree."):
        tree = params.tree.model_copy(update={key.split(".", 1)[1]: value})
        return params.model_copy(update={"tree": tree})
    return params.model_copy(update={key: value})


def expand_grid(base: EnsembleParams, grid: Mapping[str, Sequence[Any]]) -> List[Tuple[Dict[str, Any], EnsembleParams]]:
    """Every combination of the grid values applied to the base parameters, in grid order.

    Keys are EnsembleParams fields or ``tree.<field>`` for the tree block.

    Raises:
        ValueError: On an empty grid, an empty value list or an unknown key.
    """
    if not grid:
        raise ValueError("Hyperparameter grid is empty")
    keys = list(grid)
    for key in keys:
        field_name = key.split(".", 1)[1] if key.startswith("tree.") else key
        owner = type(base.tree) if key.startswith("tree.") else type(base)
        if field_name not in owner.model_fields:
            raise ValueError(f"Unknown hyperparameter '{key}'")
        if not grid[key]:
            raise ValueError(f"Hyperparameter '{key}' has no values to try")

    combos = []
    for values in itertools.product(*(grid[key] for key in keys)):
        params = base
        for key, value in zip(keys, values):
            params = _apply_override(params, key, value)
        # Re-validate the combined block through the model constructor
        params = EnsembleParams(**params.model_dump())
        combos.append((dict(zip(keys, values)), params))
    return combos


def grid_search(
    X: np.ndarray,
    y: np.ndarray,
    base_params: EnsembleParams,
    grid: Mapping[str, Sequence[Any]],
    folds: FoldSplit,
    workers: int = 1,
) -> List[Tuple[Dict[str, Any], EvalReport]]:
    """Cross-validate every grid combination, best weighted F1 first (ties keep grid order)."""
    results = []
    for overrides, params in expand_grid(base_params, grid):
        report = cross_validate(X, y, params, folds, workers=workers, overrides=overrides)
        logger.info(f"Grid point {overrides}: weighted F1 {report.weighted_f1:.4f}")
        results.append((overrides, report))
    return sorted(results, key=lambda item: -item[1].weighted_f1)
