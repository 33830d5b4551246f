"""Decision trees: weighted-Gini classification trees and second-order boosting trees.

Trees are stored as flat node arrays. Internal nodes route a sample left when
``x[feature] <= threshold``. Node 0 is the root; nodes are numbered in the
order they are created while growing depth-first, left child first.
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.configs.params import TreeParams
from app.utils.seeding import make_rng

LEAF = -1
# Gains closer than this are treated as equal; a best gain at or below it stops growth
GAIN_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat array representation of a fitted tree.

    ``value`` holds one row per node: class proportions for classification
    trees, a single leaf weight for boosting trees.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return int(self.feature.shape[0])

    @property
    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.intp)
        for node in range(self.n_nodes):
            if self.feature[node] != LEAF:
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by every row of X."""
        X = np.asarray(X, dtype=np.float64)
        nodes = np.zeros(X.shape[0], dtype=np.intp)
        active = self.feature[nodes] != LEAF
        while active.any():
            rows = np.flatnonzero(active)
            current = nodes[rows]
            go_left = X[rows, self.feature[current]] <= self.threshold[current]
            nodes[rows] = np.where(go_left, self.left[current], self.right[current])
            active[rows] = self.feature[nodes[rows]] != LEAF
        return nodes

    def predict_value(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def predict(self, X: np.ndarray) -> np.ndarray:
        """Index of the majority class of the reached leaf (ties to the lowest index)."""
        return np.argmax(self.predict_value(X), axis=1)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Tree":
        tree = cls(
            feature=np.asarray(data["feature"], dtype=np.intp),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.intp),
            right=np.asarray(data["right"], dtype=np.intp),
            value=np.asarray(data["value"], dtype=np.float64),
        )
        tree.check()
        return tree

    def check(self, n_features: Optional[int] = None) -> None:
        """Validate the node arrays.

        Raises:
            ValueError: If the arrays disagree in length, a child is missing or a feature index is out of range.
        """
        n = self.n_nodes
        if n == 0:
            raise ValueError("Tree has no nodes")
        if not (self.threshold.shape[0] == self.left.shape[0] == self.right.shape[0] == self.value.shape[0] == n):
            raise ValueError("Tree node arrays differ in length")
        if self.value.ndim != 2:
            raise ValueError("Tree values must be a 2-D array")
        internal = self.feature != LEAF
        for children in (self.left[internal], self.right[internal]):
            if children.size and (children.min() <= 0 or children.max() >= n):
                raise ValueError("Tree has an internal node with a missing child")
        if internal.any() and self.feature[internal].min() < 0:
            raise ValueError("Tree has a negative feature index")
        if n_features is not None and internal.any() and self.feature[internal].max() >= n_features:
            raise ValueError(f"Tree uses feature {int(self.feature[internal].max())} of only {n_features}")


class _NodeArrays:
    def __init__(self):
        self.feature: List[int] = []
        self.threshold: List[float] = []
        self.left: List[int] = []
        self.right: List[int] = []
        self.value: List[np.ndarray] = []

    def add_leaf(self, value: np.ndarray) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        return len(self.feature) - 1

    def build(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.intp),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.intp),
            right=np.asarray(self.right, dtype=np.intp),
            value=np.vstack(self.value),
        )


# Scores every candidate split of a node from cumulative left statistics.
GainFn = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def split_threshold(lower: float, upper: float) -> float:
    """Midpoint between two consecutive distinct values, kept strictly below the upper one."""
    mid = (lower + upper) / 2.0
    return lower if mid >= upper else mid


def _best_split(
    X: np.ndarray,
    rows: np.ndarray,
    features: Sequence[int],
    stats: np.ndarray,
    gain_fn: GainFn,
    min_samples_leaf: int,
) -> Optional[Tuple[float, int, float]]:
    """Best (gain, feature, threshold) over the given features, or None if no valid split.

    The winner is the lowest feature, then lowest threshold, among candidates
    whose gain is within GAIN_TOLERANCE of the best gain.
    """
    n = rows.shape[0]
    node_stats = stats[rows]
    total = node_stats.sum(axis=0)
    n_left = np.arange(1, n)
    size_ok = (n_left >= min_samples_leaf) & (n - n_left >= min_samples_leaf)

    candidates = []
    for feature in features:
        values = X[rows, feature]
        order = np.argsort(values, kind="stable")
        ordered = values[order]
        valid = size_ok & (ordered[:-1] < ordered[1:])
        if not valid.any():
            continue
        left = np.cumsum(node_stats[order], axis=0)[:-1]
        gains = gain_fn(left, total - left, total)
        positions = np.flatnonzero(valid)
        candidates.append((feature, ordered, positions, gains[positions]))

    if not candidates:
        return None
    best_gain = max(float(gains.max()) for _, _, _, gains in candidates)
    for feature, ordered, positions, gains in candidates:
        close = np.flatnonzero(gains >= best_gain - GAIN_TOLERANCE)
        if close.size:
            i = positions[close[0]]
            return best_gain, int(feature), split_threshold(float(ordered[i]), float(ordered[i + 1]))
    return None


def _grow(
    X: np.ndarray,
    stats: np.ndarray,
    params: TreeParams,
    gain_fn: GainFn,
    leaf_value: Callable[[np.ndarray], np.ndarray],
    min_gain: float,
    is_pure: Callable[[np.ndarray], bool],
) -> Tree:
    n_samples, n_features = X.shape
    rng = make_rng(params.seed, "split-features")
    if params.features_per_split == "sqrt":
        k = max(1, int(math.sqrt(n_features)))
    else:
        k = n_features
    all_features = np.arange(n_features)

    nodes = _NodeArrays()
    root_rows = np.arange(n_samples)
    root = nodes.add_leaf(leaf_value(root_rows))
    stack = [(root, root_rows, 0)]
    while stack:
        node, rows, depth = stack.pop()
        if depth >= params.max_depth or rows.shape[0] < params.min_samples_split or is_pure(rows):
            continue
        features = all_features if k == n_features else np.sort(rng.choice(n_features, size=k, replace=False))
        split = _best_split(X, rows, features, stats, gain_fn, params.min_samples_leaf)
        if split is None or split[0] <= min_gain:
            continue

        _, feature, threshold = split
        goes_left = X[rows, feature] <= threshold
        left_rows, right_rows = rows[goes_left], rows[~goes_left]
        left = nodes.add_leaf(leaf_value(left_rows))
        right = nodes.add_leaf(leaf_value(right_rows))
        nodes.feature[node] = feature
        nodes.threshold[node] = threshold
        nodes.left[node] = left
        nodes.right[node] = right
        stack.append((right, right_rows, depth + 1))
        stack.append((left, left_rows, depth + 1))
    return nodes.build()


def _check_inputs(X: np.ndarray, n_targets: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"Training needs a non-empty 2-D feature matrix, got shape {X.shape}")
    if X.shape[1] == 0:
        raise ValueError("Training needs at least one feature")
    if X.shape[0] != n_targets:
        raise ValueError(f"Feature matrix has {X.shape[0]} rows but {n_targets} targets were given")
    if np.isnan(X).any():
        raise ValueError("Feature matrix contains NaN values")
    return X


def gini_gain(left: np.ndarray, right: np.ndarray, total: np.ndarray) -> np.ndarray:
    """Weighted Gini decrease per unit of node weight.

    The last statistics column is the sample weight, the others the weighted
    class counts.
    """
    w_left, w_right, w = left[:, -1], right[:, -1], total[-1]
    impurity_left = w_left - (left[:, :-1] ** 2).sum(axis=1) / w_left
    impurity_right = w_right - (right[:, :-1] ** 2).sum(axis=1) / w_right
    parent = w - (total[:-1] ** 2).sum() / w
    return (parent - impurity_left - impurity_right) / w


def train_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: TreeParams,
    n_classes: Optional[int] = None,
    sample_weight: Optional[np.ndarray] = None,
) -> Tree:
    """Grow a classification tree by greedy weighted-Gini splits.

    ``y`` holds class indices in [0, n_classes). Leaves store the weighted
    class proportions of their training samples. Growth stops at max_depth,
    below min_samples_split, when no split leaves min_samples_leaf samples on
    both sides, and at zero gain.

    Raises:
        ValueError: On empty data, zero features, NaN values or mismatched lengths.
    """
    y = np.asarray(y, dtype=np.intp)
    X = _check_inputs(X, y.shape[0])
    n_classes = int(y.max()) + 1 if n_classes is None else n_classes
    weights = np.ones(y.shape[0]) if sample_weight is None else np.asarray(sample_weight, dtype=np.float64)

    stats = np.zeros((y.shape[0], n_classes + 1))
    stats[np.arange(y.shape[0]), y] = weights
    stats[:, -1] = weights

    def leaf_value(rows: np.ndarray) -> np.ndarray:
        counts = stats[rows, :-1].sum(axis=0)
        total = counts.sum()
        return counts / total if total > 0 else np.full(n_classes, 1.0 / n_classes)

    def is_pure(rows: np.ndarray) -> bool:
        return np.unique(y[rows]).shape[0] <= 1

    return _grow(X, stats, params, gini_gain, leaf_value, GAIN_TOLERANCE, is_pure)


def train_boosting_tree(X: np.ndarray, grad: np.ndarray, hess: np.ndarray, params: TreeParams) -> Tree:
    """Grow a regression tree on first and second order loss derivatives.

    Leaf weight is -G / (H + lambda); a split is kept only when its gain
    0.5 * (GL^2/(HL+lambda) + GR^2/(HR+lambda) - G^2/(H+lambda)) exceeds
    ``min_split_loss``.
    """
    grad = np.asarray(grad, dtype=np.float64)
    hess = np.asarray(hess, dtype=np.float64)
    X = _check_inputs(X, grad.shape[0])
    lam = params.reg_lambda
    stats = np.column_stack([grad, hess])

    def gain_fn(left: np.ndarray, right: np.ndarray, total: np.ndarray) -> np.ndarray:
        parent = total[0] ** 2 / (total[1] + lam)
        return 0.5 * (left[:, 0] ** 2 / (left[:, 1] + lam) + right[:, 0] ** 2 / (right[:, 1] + lam) - parent)

    def leaf_value(rows: np.ndarray) -> np.ndarray:
        g, h = stats[rows].sum(axis=0)
        return np.array([-g / (h + lam)])

    return _grow(
        X, stats, params, gain_fn, leaf_value, max(params.min_split_loss, GAIN_TOLERANCE), lambda rows: False
    )
