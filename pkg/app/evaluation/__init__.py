"""Cross-validation, metrics, ablation sweeps and embedding export."""

from app.evaluation.ablation import (
    DESCRIPTOR_COMBOS,
    AblationAxes,
    AblationCell,
    AblationResult,
    combo_name,
    run_ablation,
)
from app.evaluation.crossval import cross_validate, expand_grid, grid_search, holdout_evaluate
from app.evaluation.embedding import EmbeddingExport, export_embedding, pca_project
from app.evaluation.folds import FoldSplit, holdout_split, stratified_kfold
from app.evaluation.metrics import EvalReport, compute_metrics
from app.evaluation.reports import evaluation_rows, read_report_table, write_report

__all__ = [
    "DESCRIPTOR_COMBOS",
    "AblationAxes",
    "AblationCell",
    "AblationResult",
    "EmbeddingExport",
    "EvalReport",
    "FoldSplit",
    "combo_name",
    "compute_metrics",
    "cross_validate",
    "evaluation_rows",
    "expand_grid",
    "export_embedding",
    "grid_search",
    "holdout_evaluate",
    "holdout_split",
    "pca_project",
    "read_report_table",
    "run_ablation",
    "stratified_kfold",
    "write_report",
]
