"""Ablation sweeps over feature combinations, patch sizes, view modes and LBP windows."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from app.configs.params import (
    FEATURE_BLOCKS,
    LBP_WINDOWS,
    PATCH_SIDES,
    BalanceMode,
    EnsembleParams,
    FeatureView,
    GridParams,
    GroupingMode,
    LbpParams,
    canonical_combo,
)
from app.dataset import CorpusManifest
from app.evaluation.crossval import cross_validate
from app.evaluation.folds import stratified_kfold
from app.evaluation.metrics import EvalReport
from app.features.vectors import feature_matrix, feature_vectors, select_features
from app.learners import train
from app.logging_config import get_logger
from app.pipeline import balance_patches, check_view_mode, compose_vectors, extract_patches

logger = get_logger(__name__)

ENERGY_BLOCKS = ("eH", "eS", "eV")

# Rows of the feature-descriptor comparison: each energy channel alone, all three,
# texture alone, texture with hue energy, texture with all energies.
DESCRIPTOR_COMBOS: Tuple[Tuple[str, ...], ...] = (
    ("eH",),
    ("eS",),
    ("eV",),
    ENERGY_BLOCKS,
    ("LBP",),
    ("eH", "LBP"),
    FEATURE_BLOCKS,
)


def combo_name(combo: Sequence[str]) -> str:
    """Display name of a block combination, e.g. ``LBP+eHSV`` for all four blocks."""
    blocks = canonical_combo(combo)
    energies = [b for b in blocks if b in ENERGY_BLOCKS]
    parts = ["LBP"] if "LBP" in blocks else []
    if len(energies) == len(ENERGY_BLOCKS):
        parts.append("eHSV")
    else:
        parts.extend(energies)
    return "+".join(parts)


@dataclass(frozen=True)
class AblationAxes:
    combos: Tuple[Tuple[str, ...], ...] = DESCRIPTOR_COMBOS
    patch_sides: Tuple[int, ...] = (256,)
    view_modes: Tuple[FeatureView, ...] = (FeatureView.SURFACE,)
    lbp_windows: Tuple[int, ...] = (5,)

    def validate(self) -> List[str]:
        """Problems with the axes, empty when they can be swept."""
        errors = []
        for name in ("combos", "patch_sides", "view_modes", "lbp_windows"):
            if not getattr(self, name):
                errors.append(f"Ablation axis '{name}' is empty")
        for side in self.patch_sides:
            if side not in PATCH_SIDES:
                errors.append(f"Patch side {side} is not one of {', '.join(map(str, PATCH_SIDES))}")
        for window in self.lbp_windows:
            if window not in LBP_WINDOWS:
                errors.append(f"LBP window {window} is not one of {', '.join(map(str, LBP_WINDOWS))}")
        for combo in self.combos:
            try:
                canonical_combo(combo)
            except ValueError as e:
                errors.append(str(e))
        return errors


@dataclass(frozen=True, eq=False)
class AblationCell:
    combo: Tuple[str, ...]
    patch_side: int
    view_mode: FeatureView
    lbp_window: int
    report: EvalReport

    @property
    def combo_name(self) -> str:
        return combo_name(self.combo)

    def axis_values(self) -> Dict[str, str]:
        return {
            "combo": self.combo_name,
            "patch_side": str(self.patch_side),
            "view": self.view_mode.value,
            "lbp_window": str(self.lbp_window),
        }


@dataclass
class AblationResult:
    cells: List[AblationCell] = field(default_factory=list)
    # Per patch side: training log-loss of a gradient-boosting run after every stage
    loss_curves: Dict[int, Tuple[float, ...]] = field(default_factory=dict)

    def select(self, **axes) -> List[AblationCell]:
        """Cells whose axis values match, e.g. ``select(patch_side=256, view_mode=FeatureView.SURFACE)``."""
        return [cell for cell in self.cells if all(getattr(cell, key) == value for key, value in axes.items())]


def run_ablation(
    manifest: CorpusManifest,
    axes: AblationAxes,
    params: EnsembleParams,
    grid: Optional[GridParams] = None,
    k: int = 5,
    grouping: GroupingMode = GroupingMode.PER_PATCH,
    seed: int = 0,
    workers: int = 1,
    balance_mode: Optional[BalanceMode] = None,
    loss_params: Optional[EnsembleParams] = None,
) -> AblationResult:
    """Cross-validate every cell of the sweep and return one report per cell.

    Patches are extracted once per patch side and single-view vectors computed
    once per LBP window; view modes and block combinations are derived from
    them. With ``loss_params`` a gradient-boosting model is also trained per
    patch side on the full descriptor of the first view mode and its training
    loss curve recorded.

    Raises:
        ValueError: If an axis is empty or holds a value the data cannot serve.
    """
    errors = axes.validate()
    if errors:
        raise ValueError("; ".join(errors))
    grid = grid or GridParams()
    result = AblationResult()
    views = {entry.view for entry in manifest}
    for view_mode in axes.view_modes:
        check_view_mode(list(views), FeatureView(view_mode))

    for side in axes.patch_sides:
        side_grid = GridParams(**{**grid.model_dump(), "patch_side": side})
        records = extract_patches(manifest, side_grid, workers)
        if balance_mode is not None:
            records = balance_patches(records, balance_mode, manifest, side_grid)
        if not records:
            raise ValueError(f"No patch of side {side} survives extraction")

        for window in axes.lbp_windows:
            vectors = feature_vectors(records, LbpParams(window_side=window), workers)
            for view_mode in axes.view_modes:
                view_mode = FeatureView(view_mode)
                composed = compose_vectors(vectors, view_mode, seed=seed)
                _, y = feature_matrix(composed)
                folds = stratified_kfold(y, [v.stone_id for v in composed], k, grouping, seed)
                for combo in axes.combos:
                    blocks = canonical_combo(combo)
                    X, _ = feature_matrix([select_features(v, blocks) for v in composed])
                    report = cross_validate(
                        X,
                        y,
                        params,
                        folds,
                        workers,
                        combo=combo_name(blocks),
                        patch_side=side,
                        view=view_mode.value,
                        lbp_window=window,
                    )
                    logger.info(
                        f"Ablation side={side} window={window} view={view_mode.value} combo={combo_name(blocks)}: "
                        f"accuracy {report.accuracy:.4f}, weighted F1 {report.weighted_f1:.4f}"
                    )
                    result.cells.append(AblationCell(blocks, side, view_mode, window, report))

                if loss_params is not None and side not in result.loss_curves:
                    X, _ = feature_matrix(composed)
                    result.loss_curves[side] = train(X, y, loss_params, workers=workers).train_loss
    return result
