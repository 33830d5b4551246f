"""Three-dimensional PCA embedding of feature vectors for cluster-separability inspection.

PCA stands in for a stochastic manifold embedding: it is deterministic and
needs no optimisation, which keeps the export reproducible.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Tuple, Union

import numpy as np

from app.features.vectors import FeatureVector
from app.logging_config import get_logger

logger = get_logger(__name__)

EMBEDDING_HEADER = "# stonetype embedding: PCA projection (substitute for a UMAP embedding)"


@dataclass(frozen=True, eq=False)
class EmbeddingExport:
    """Projected coordinates plus what is needed to reconstruct and label them."""

    coordinates: np.ndarray
    explained_variance_ratio: np.ndarray
    components: np.ndarray
    mean: np.ndarray
    rank_deficient: bool
    labels: Tuple[str, ...] = ()
    views: Tuple[str, ...] = ()
    stone_ids: Tuple[str, ...] = ()

    def reconstruct(self) -> np.ndarray:
        return self.coordinates @ self.components + self.mean


def pca_project(vectors: Union[np.ndarray, Sequence[FeatureVector]], out_dim: int = 3) -> EmbeddingExport:
    """Mean-centred principal-component projection onto ``out_dim`` axes.

    Axes come in decreasing variance order; each axis is signed so that its
    largest-magnitude loading is positive. When the data has fewer than
    ``out_dim`` non-degenerate directions, the missing axes are zero and the
    export is flagged rank-deficient.

    Raises:
        ValueError: If there are fewer than out_dim + 1 samples or fewer than out_dim dimensions.
    """
    labels = views = stone_ids = ()
    if isinstance(vectors, np.ndarray):
        X = np.asarray(vectors, dtype=np.float64)
    else:
        vectors = list(vectors)
        X = np.vstack([v.components for v in vectors]) if vectors else np.zeros((0, 0))
        labels = tuple(v.label.value for v in vectors)
        views = tuple(v.view.value for v in vectors)
        stone_ids = tuple(v.stone_id for v in vectors)

    if X.ndim != 2 or X.shape[0] < out_dim + 1 or X.shape[1] < out_dim:
        raise ValueError(
            f"PCA to {out_dim} dimensions needs at least {out_dim + 1} samples of dimension >= {out_dim}, "
            f"got shape {X.shape}"
        )

    mean = X.mean(axis=0)
    centred = X - mean
    _, singular, vt = np.linalg.svd(centred, full_matrices=False)
    tolerance = singular.max(initial=0.0) * max(X.shape) * np.finfo(np.float64).eps
    rank = int(np.count_nonzero(singular > tolerance))

    components = vt[:out_dim].copy()
    for axis in range(out_dim):
        if components[axis, np.argmax(np.abs(components[axis]))] < 0:
            components[axis] = -components[axis]
    components[rank:] = 0.0

    variance = singular**2
    total = variance.sum()
    ratios = variance[:out_dim] / total if total > tolerance else np.zeros(out_dim)
    ratios[rank:] = 0.0

    if rank < out_dim:
        logger.warning(f"Feature data has rank {rank} < {out_dim}; missing PCA axes are zero")
    return EmbeddingExport(
        coordinates=centred @ components.T,
        explained_variance_ratio=ratios,
        components=components,
        mean=mean,
        rank_deficient=rank < out_dim,
        labels=labels,
        views=views,
        stone_ids=stone_ids,
    )


def export_embedding(export: EmbeddingExport, path: Path) -> None:
    """Write the embedding as TSV: ``class, view, stone_id, pc1..pcN`` per sample."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n_axes = export.coordinates.shape[1]
    ratios = ",".join(f"{r:.6f}" for r in export.explained_variance_ratio)
    lines = [
        EMBEDDING_HEADER,
        f"# explained_variance_ratio={ratios} rank_deficient={str(export.rank_deficient).lower()}",
        "\t".join(["class", "view", "stone_id"] + [f"pc{i + 1}" for i in range(n_axes)]),
    ]
    n = export.coordinates.shape[0]
    labels = export.labels or ("",) * n
    views = export.views or ("",) * n
    stone_ids = export.stone_ids or ("",) * n
    for row, label, view, stone_id in zip(export.coordinates, labels, views, stone_ids):
        lines.append("\t".join([label, view, stone_id] + [f"{c:.9g}" for c in row]))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    logger.info(f"Wrote {n}-point embedding to {path}")
