"""Stage chaining shared by the command line and the ablation runner."""

from functools import partial
from typing import List, Optional, Sequence

from app.configs.params import BalanceMode, FeatureView, GridParams, LbpParams, canonical_combo
from app.dataset import CorpusManifest, ManifestEntry, PatchRecord, ViewKind, load_image_pair
from app.features.vectors import FeatureVector, feature_vectors, pair_views, select_features
from app.logging_config import get_logger
from app.patching import ImageStore, augment, balance, extract_patch_grid
from app.utils.parallel import parallel_map

logger = get_logger(__name__)


def _extract_entry(entry: ManifestEntry, manifest: CorpusManifest, grid: GridParams) -> List[PatchRecord]:
    image, mask = load_image_pair(entry, manifest)
    return extract_patch_grid(image, mask, grid, entry)


def extract_patches(
    manifest: CorpusManifest, grid: GridParams, workers: int = 1, with_augmentation: bool = False
) -> List[PatchRecord]:
    """Grid patches of every manifest entry, in manifest order.

    With augmentation every patch is followed by its seven derived variants.
    """
    per_entry = parallel_map(partial(_extract_entry, manifest=manifest, grid=grid), manifest.entries, workers)
    records = [record for records in per_entry for record in records]
    logger.info(f"Extracted {len(records)} patches of side {grid.patch_side} from {len(manifest)} images")
    if with_augmentation:
        records = [variant for record in records for variant in augment(record)]
        logger.info(f"Augmented to {len(records)} patches")
    return records


def balance_patches(
    records: Sequence[PatchRecord], mode: BalanceMode, manifest: Optional[CorpusManifest], grid: GridParams
) -> List[PatchRecord]:
    """Balance patches; over-sampling reads new patches from the manifest images."""
    store = ImageStore.from_manifest(manifest) if manifest is not None else None
    return balance(records, mode, store, grid)


def check_view_mode(views: Sequence[ViewKind], view_mode: FeatureView) -> None:
    """Fail early when the requested view mode cannot be served by the available views.

    Raises:
        ValueError: If a single view is missing, or mixed mode lacks either view.
    """
    present = set(views)
    if view_mode == FeatureView.MIXED:
        missing = [v.value for v in ViewKind if v not in present]
        if missing:
            raise ValueError(f"Mixed view mode needs SURFACE and SECTION data; missing {', '.join(missing)}")
    elif ViewKind(view_mode.value) not in present:
        raise ValueError(f"View mode {view_mode.value} requested but the data holds no {view_mode.value} patches")


def compose_vectors(
    vectors: Sequence[FeatureVector], view_mode: FeatureView, combo: Optional[Sequence[str]] = None, seed: int = 0
) -> List[FeatureVector]:
    """Single-view vectors filtered to one view, or paired into mixed vectors, then reduced to a combo."""
    view_mode = FeatureView(view_mode)
    if view_mode == FeatureView.MIXED:
        composed = pair_views(vectors, seed)
    else:
        composed = [v for v in vectors if v.view == view_mode]
    if combo is None:
        return composed
    blocks = canonical_combo(combo)
    return [select_features(v, blocks) for v in composed]


def featurize(
    records: Sequence[PatchRecord],
    lbp: LbpParams,
    view_mode: FeatureView = FeatureView.SURFACE,
    combo: Optional[Sequence[str]] = None,
    seed: int = 0,
    workers: int = 1,
) -> List[FeatureVector]:
    """Feature vectors for a view mode and block combination."""
    view_mode = FeatureView(view_mode)
    check_view_mode([r.view for r in records], view_mode)
    wanted = records if view_mode == FeatureView.MIXED else [r for r in records if r.view.value == view_mode.value]
    vectors = feature_vectors(wanted, lbp, workers)
    return compose_vectors(vectors, view_mode, combo, seed)
