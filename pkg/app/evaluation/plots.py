"""Static SVG plots of evaluation and ablation results."""

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from app.evaluation.ablation import AblationResult  # noqa: E402
from app.evaluation.metrics import EvalReport  # noqa: E402
from app.logging_config import get_logger  # noqa: E402

logger = get_logger(__name__)

# Fixed ids and no timestamp so re-running a stage rewrites identical files
plt.rcParams["svg.hashsalt"] = "stonetype"
_SVG_METADATA = {"Date": None}


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)
    logger.debug(f"Wrote plot {path}")
    return path


def plot_per_class(report: EvalReport, path: Path, title: str = "Per-class metrics") -> Path:
    """Grouped bars of precision, recall and F1 per class."""
    names = [f"{c.value} ({c.code})" for c in report.classes]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(7, 4))
    bars = (("precision", report.precision), ("recall", report.recall), ("F1", report.f1))
    for offset, (metric, values) in zip((-0.25, 0.0, 0.25), bars):
        ax.bar(x + offset, values, width=0.25, label=metric)
    ax.set_xticks(x, names)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title(f"{title} (weighted F1 {report.weighted_f1:.3f})")
    ax.legend(loc="lower right")
    fig.tight_layout()
    return _save(fig, path)


def plot_patch_size_accuracy(result: AblationResult, path: Path) -> Path:
    """Accuracy against patch side, one line per (view mode, combination, LBP window)."""
    fig, ax = plt.subplots(figsize=(7, 4))
    series = {}
    for cell in result.cells:
        key = (cell.view_mode.value, cell.combo_name, cell.lbp_window)
        series.setdefault(key, []).append((cell.patch_side, cell.report.accuracy))
    for (view, combo, window), points in series.items():
        points.sort()
        ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=f"{view} {combo} w{window}")
    ax.set_xlabel("patch side (px)")
    ax.set_ylabel("accuracy")
    ax.set_ylim(0, 1.05)
    ax.set_title("Accuracy per patch size")
    if series:
        ax.legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def plot_combo_f1(result: AblationResult, path: Path) -> Path:
    """Weighted F1 per feature combination, bars grouped by view mode (largest patch side, first window)."""
    side = max(cell.patch_side for cell in result.cells)
    window = result.cells[0].lbp_window
    cells = result.select(patch_side=side, lbp_window=window)
    combos = list(dict.fromkeys(cell.combo_name for cell in cells))
    views = list(dict.fromkeys(cell.view_mode for cell in cells))
    x = np.arange(len(combos))
    width = 0.8 / max(1, len(views))

    fig, ax = plt.subplots(figsize=(8, 4))
    for i, view in enumerate(views):
        scores = {cell.combo_name: cell.report.weighted_f1 for cell in cells if cell.view_mode == view}
        ax.bar(x + (i - (len(views) - 1) / 2) * width, [scores.get(c, 0.0) for c in combos], width, label=view.value)
    ax.set_xticks(x, combos)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("weighted F1")
    ax.set_title(f"Feature descriptors ({side} px patches, LBP window {window})")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_loss_curves(result: AblationResult, path: Path) -> Path:
    """Training log-loss per boosting stage, one line per patch side."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for side, losses in sorted(result.loss_curves.items()):
        ax.plot(np.arange(1, len(losses) + 1), losses, label=f"{side} px")
    ax.set_xlabel("stage")
    ax.set_ylabel("training log-loss")
    ax.set_title("Gradient boosting loss per patch size")
    if result.loss_curves:
        ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def plot_ablation(result: AblationResult, directory: Path) -> List[Path]:
    """All ablation plots into a directory."""
    directory = Path(directory)
    paths = [
        plot_patch_size_accuracy(result, directory / "accuracy_per_patch_size.svg"),
        plot_combo_f1(result, directory / "f1_per_combo.svg"),
    ]
    if result.loss_curves:
        paths.append(plot_loss_curves(result, directory / "loss_per_patch_size.svg"))
    return paths
