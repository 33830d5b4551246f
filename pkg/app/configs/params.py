"""Typed parameter blocks shared by the pipeline stages."""

from enum import Enum
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

PATCH_SIDES = (64, 128, 200, 256, 512)
LBP_WINDOWS = (5, 7, 9)
FEATURE_BLOCKS = ("eH", "eS", "eV", "LBP")
BLOCK_BINS = 10
# Smallest patch every feature can be computed on (energy needs 3, the largest LBP window 9)
FEATURE_MIN_SIDE = max(3, max(LBP_WINDOWS))


class BalanceMode(str, Enum):
    """Class balancing strategy."""

    OVERSAMPLE = "oversample"
    UNDERSAMPLE = "undersample"


class EnsembleKind(str, Enum):
    """Tree-ensemble classifier family."""

    RANDOM_FOREST = "random_forest"
    BAGGING = "bagging"
    ADABOOST = "adaboost"
    GRADIENT_BOOSTING = "gradient_boosting"


class FeatureView(str, Enum):
    """Where a feature vector comes from: one view, or both views concatenated."""

    SURFACE = "SURFACE"
    SECTION = "SECTION"
    MIXED = "MIXED"

    @classmethod
    def parse(cls, token: str) -> "FeatureView":
        wanted = token.strip().upper()
        for view in cls:
            if wanted == view.value:
                return view
        raise ValueError(f"Unknown feature view '{token}' (expected surface, section or mixed)")


class GroupingMode(str, Enum):
    """How cross-validation folds treat patches of the same stone."""

    PER_PATCH = "per-patch"
    PER_STONE = "per-stone"


def canonical_combo(blocks) -> Tuple[str, ...]:
    """Validate a feature-block combination and return it in assembly order.

    Accepts block names or a ``+``/``,`` separated string; ``eHSV`` stands for
    all three energy blocks.
    """
    if isinstance(blocks, str):
        blocks = [b for b in blocks.replace("+", ",").split(",") if b.strip()]
    lookup = {name.lower(): name for name in FEATURE_BLOCKS}
    chosen = set()
    for block in blocks:
        token = str(block).strip().lower()
        if token == "ehsv":
            chosen.update(("eH", "eS", "eV"))
            continue
        name = lookup.get(token)
        if name is None:
            raise ValueError(f"Unknown feature block '{block}' (expected {', '.join(FEATURE_BLOCKS)} or eHSV)")
        chosen.add(name)
    if not chosen:
        raise ValueError("Feature combination must name at least one block")
    return tuple(name for name in FEATURE_BLOCKS if name in chosen)


class GridParams(BaseModel):
    """Patch grid geometry and rejection thresholds."""

    model_config = ConfigDict(frozen=True)

    patch_side: int = 256
    max_overlap: int = Field(20, ge=0)
    max_non_stone_fraction: float = Field(0.10, ge=0.0, le=1.0)
    seed: int = 0

    @field_validator("patch_side")
    @classmethod
    def validate_patch_side(cls, v: int) -> int:
        if v < FEATURE_MIN_SIDE:
            raise ValueError(f"patch side {v} is below the feature minimum of {FEATURE_MIN_SIDE} pixels")
        if v not in PATCH_SIDES:
            raise ValueError(f"patch side must be one of {', '.join(map(str, PATCH_SIDES))}, got {v}")
        return v

    @model_validator(mode="after")
    def validate_overlap(self) -> "GridParams":
        if self.max_overlap >= self.patch_side:
            raise ValueError(f"max_overlap ({self.max_overlap}) must be smaller than patch_side ({self.patch_side})")
        return self

    @property
    def stride(self) -> int:
        return self.patch_side - self.max_overlap


class LbpParams(BaseModel):
    """Local binary pattern sampling: 8 neighbours on a circle inscribed in the window."""

    model_config = ConfigDict(frozen=True)

    window_side: int = 5
    neighbors: Literal[8] = 8
    mapping: Literal["riu2"] = "riu2"

    @field_validator("window_side")
    @classmethod
    def validate_window_side(cls, v: int) -> int:
        if v not in LBP_WINDOWS:
            raise ValueError(f"LBP window side must be one of {', '.join(map(str, LBP_WINDOWS))}, got {v}")
        return v

    @property
    def radius(self) -> int:
        return (self.window_side - 1) // 2


class TreeParams(BaseModel):
    """Growth limits for a single decision tree."""

    model_config = ConfigDict(frozen=True)

    max_depth: int = Field(50, ge=1)
    min_samples_split: int = Field(2, ge=2)
    min_samples_leaf: int = Field(1, ge=1)
    features_per_split: Literal["all", "sqrt"] = "all"
    # Boosting only: minimum gain a split must exceed, and L2 penalty on leaf weights
    min_split_loss: float = Field(0.0, ge=0.0)
    reg_lambda: float = Field(1.0, ge=0.0)
    seed: int = 0


class EnsembleParams(BaseModel):
    """Hyperparameters of one tree-ensemble classifier."""

    model_config = ConfigDict(frozen=True)

    kind: EnsembleKind = EnsembleKind.RANDOM_FOREST
    n_estimators: int = Field(50, ge=1)
    learning_rate: float = Field(0.1, gt=0.0)
    base_score: float = Field(0.5, gt=0.0, lt=1.0)
    bootstrap: bool = False
    base_estimator: Literal["tree", "forest"] = "tree"
    base_forest_size: int = Field(3, ge=1)
    tree: TreeParams = TreeParams()
    seed: int = 0

    def with_seed(self, seed: int) -> "EnsembleParams":
        return self.model_copy(update={"seed": seed, "tree": self.tree.model_copy(update={"seed": seed})})


class RunConfig(BaseModel):
    """Full configuration of one CLI stage run, recorded in every artifact sidecar."""

    model_config = ConfigDict(frozen=True)

    command: str
    inputs: Tuple[str, ...] = ()
    output: Optional[str] = None
    grid: GridParams = GridParams()
    lbp: LbpParams = LbpParams()
    preset: Literal["paper", "desk"] = "desk"
    ensemble: Optional[EnsembleParams] = None
    balance: Optional[BalanceMode] = None
    view_mode: FeatureView = FeatureView.SURFACE
    combo: Tuple[str, ...] = FEATURE_BLOCKS
    k: int = Field(5, ge=2)
    grouping: GroupingMode = GroupingMode.PER_PATCH
    seed: int = 0
    workers: int = Field(1, ge=1)

    @field_validator("view_mode", mode="before")
    @classmethod
    def parse_view_mode(cls, v):
        return FeatureView.parse(v) if isinstance(v, str) else v

    @field_validator("combo", mode="before")
    @classmethod
    def parse_combo(cls, v):
        return canonical_combo(v)
