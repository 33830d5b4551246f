"""Stratified fold construction and the hold-out split."""

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from sklearn.model_selection import StratifiedGroupKFold, StratifiedKFold, train_test_split

from app.configs.params import GroupingMode
from app.logging_config import get_logger

logger = get_logger(__name__)

_SEED_MASK = (1 << 32) - 1


@dataclass(frozen=True, eq=False)
class FoldSplit:
    """Test indices of every fold; the folds partition the sample indices."""

    folds: Tuple[np.ndarray, ...]
    mode: GroupingMode
    n_samples: int

    def __len__(self) -> int:
        return len(self.folds)

    def train_test(self, fold: int) -> Tuple[np.ndarray, np.ndarray]:
        test = self.folds[fold]
        train = np.setdiff1d(np.arange(self.n_samples), test, assume_unique=True)
        return train, test

    def reversed(self) -> "FoldSplit":
        return FoldSplit(tuple(reversed(self.folds)), self.mode, self.n_samples)


def _check_class_sizes(labels: np.ndarray, groups: Optional[Sequence[str]], k: int, mode: GroupingMode) -> None:
    if mode == GroupingMode.PER_STONE:
        stones = defaultdict(set)
        for label, group in zip(labels.tolist(), groups):
            stones[label].add(group)
        sizes = {label: len(members) for label, members in stones.items()}
        unit = "stones"
    else:
        sizes = dict(Counter(labels.tolist()))
        unit = "samples"
    too_small = {label: n for label, n in sizes.items() if n < k}
    if too_small:
        details = ", ".join(f"class {label}: {n}" for label, n in sorted(too_small.items()))
        raise ValueError(f"Every class needs at least k={k} {unit} for {mode.value} folds ({details})")


def stratified_kfold(
    labels: Sequence[int],
    groups: Optional[Sequence[str]] = None,
    k: int = 5,
    mode: GroupingMode = GroupingMode.PER_PATCH,
    seed: int = 0,
) -> FoldSplit:
    """Shuffled stratified k-fold split.

    Per-patch folds keep every class within one sample of its global share.
    Per-stone folds additionally keep all samples of a group (stone id) in a
    single fold.

    Raises:
        ValueError: If k < 2, groups are missing in per-stone mode, or a class is too small for k.
    """
    labels = np.asarray(labels)
    mode = GroupingMode(mode)
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    if mode == GroupingMode.PER_STONE and (groups is None or len(groups) != labels.shape[0]):
        raise ValueError("Per-stone folds need one group id per sample")
    _check_class_sizes(labels, groups, k, mode)

    placeholder = np.zeros((labels.shape[0], 1))
    if mode == GroupingMode.PER_STONE:
        splitter = StratifiedGroupKFold(n_splits=k, shuffle=True, random_state=seed & _SEED_MASK)
        splits = splitter.split(placeholder, labels, groups=np.asarray(groups))
    else:
        splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed & _SEED_MASK)
        splits = splitter.split(placeholder, labels)

    folds = tuple(np.sort(test) for _, test in splits)
    if any(fold.size == 0 for fold in folds):
        raise ValueError(f"Could not build {k} non-empty {mode.value} folds")
    logger.debug(f"Built {k} {mode.value} folds of sizes {[int(f.size) for f in folds]}")
    return FoldSplit(folds, mode, int(labels.shape[0]))


def holdout_split(labels: Sequence[int], fraction: float = 0.10, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Stratified (train, test) index split keeping ``fraction`` of the samples aside.

    Raises:
        ValueError: If the fraction is outside (0, 1) or a class has fewer than two samples.
    """
    labels = np.asarray(labels)
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"Hold-out fraction must be in (0, 1), got {fraction}")
    train, test = train_test_split(
        np.arange(labels.shape[0]), test_size=fraction, stratify=labels, random_state=seed & _SEED_MASK
    )
    return np.sort(train), np.sort(test)
