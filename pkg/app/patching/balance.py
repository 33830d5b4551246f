"""Class balancing of patch sets by off-grid over-sampling or seeded under-sampling."""

from collections import Counter, OrderedDict, defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.configs.params import BalanceMode, GridParams
from app.dataset import (
    CLASS_ORDER,
    BinaryMask,
    ClassLabel,
    CorpusManifest,
    ManifestEntry,
    PatchRecord,
    RgbImage,
    ViewKind,
    load_image_pair,
)
from app.logging_config import get_logger
from app.patching.grid import crop_padded, grid_anchors, is_acceptable, stone_bbox
from app.utils.seeding import make_rng

logger = get_logger(__name__)

MAX_ATTEMPTS_PER_PATCH = 100
_CACHE_SIZE = 8


class OversamplingError(RuntimeError):
    """No acceptable off-grid patch could be drawn for a class."""

    def __init__(self, label: ClassLabel, view: ViewKind, message: str):
        self.label = label
        self.view = view
        super().__init__(f"Over-sampling class {label.value} ({view.value}): {message}")


@dataclass(frozen=True)
class BalanceTarget:
    mode: BalanceMode
    target_count_per_class: int

    @classmethod
    def from_counts(cls, mode: BalanceMode, counts: Dict[ClassLabel, int]) -> "BalanceTarget":
        """Target of a view: the largest class count when over-sampling, the smallest otherwise."""
        if not counts:
            raise ValueError("Cannot balance an empty patch set")
        pick = max if mode == BalanceMode.OVERSAMPLE else min
        return cls(mode, pick(counts.values()))


class ImageStore:
    """Source images of a corpus grouped by (class, view).

    Images registered with their arrays stay in memory; manifest entries are
    read on demand and kept in a small least-recently-used cache.
    """

    def __init__(self, manifest: Optional[CorpusManifest] = None):
        self._manifest = manifest
        self._entries: Dict[Tuple[ClassLabel, ViewKind], List[ManifestEntry]] = defaultdict(list)
        self._pinned: Dict[ManifestEntry, Tuple[RgbImage, BinaryMask]] = {}
        self._cache: "OrderedDict[ManifestEntry, Tuple[RgbImage, BinaryMask]]" = OrderedDict()

    @classmethod
    def from_manifest(cls, manifest: CorpusManifest) -> "ImageStore":
        store = cls(manifest)
        for entry in manifest:
            store.add(entry)
        return store

    @classmethod
    def from_arrays(cls, items: Iterable[Tuple[ManifestEntry, RgbImage, BinaryMask]]) -> "ImageStore":
        store = cls()
        for entry, image, mask in items:
            store.add(entry, image, mask)
        return store

    def add(self, entry: ManifestEntry, image: Optional[RgbImage] = None, mask: Optional[BinaryMask] = None) -> None:
        self._entries[(entry.label, entry.view)].append(entry)
        if image is not None and mask is not None:
            self._pinned[entry] = (np.asarray(image), np.asarray(mask, dtype=bool))

    def entries(self, label: ClassLabel, view: ViewKind) -> List[ManifestEntry]:
        return list(self._entries.get((label, view), []))

    def load(self, entry: ManifestEntry) -> Tuple[RgbImage, BinaryMask]:
        if entry in self._pinned:
            return self._pinned[entry]
        if entry in self._cache:
            self._cache.move_to_end(entry)
            return self._cache[entry]
        pair = load_image_pair(entry, self._manifest)
        self._cache[entry] = pair
        if len(self._cache) > _CACHE_SIZE:
            self._cache.popitem(last=False)
        return pair


def _draw_off_grid(
    label: ClassLabel,
    view: ViewKind,
    count: int,
    store: ImageStore,
    params: GridParams,
    rng: np.random.Generator,
) -> List[PatchRecord]:
    """Draw ``count`` accepted patches at random positions that are not grid anchors."""
    entries = store.entries(label, view)
    if not entries:
        raise OversamplingError(label, view, "no source images available")

    side = params.patch_side
    anchor_sets: Dict[ManifestEntry, set] = {}
    drawn = []
    for _ in range(count):
        for _attempt in range(MAX_ATTEMPTS_PER_PATCH):
            entry = entries[int(rng.integers(len(entries)))]
            image, mask = store.load(entry)
            bbox = stone_bbox(mask)
            if bbox is None:
                continue
            x = int(rng.integers(bbox.x0, max(bbox.x0, bbox.x1 - side + 1) + 1))
            y = int(rng.integers(bbox.y0, max(bbox.y0, bbox.y1 - side + 1) + 1))

            if entry not in anchor_sets:
                anchor_sets[entry] = {(a.x, a.y) for a in grid_anchors(mask, params)}
            if (x, y) in anchor_sets[entry]:
                continue

            pixels = crop_padded(image, x, y, side)
            if not is_acceptable(pixels, crop_padded(mask, x, y, side), params):
                continue
            drawn.append(PatchRecord(pixels, (x, y), label, view, entry.stone_id, synthetic=True))
            break
        else:
            raise OversamplingError(
                label, view, f"no acceptable off-grid patch after {MAX_ATTEMPTS_PER_PATCH} attempts"
            )
    return drawn


def _balance_view(
    records: List[PatchRecord],
    view: ViewKind,
    mode: BalanceMode,
    store: Optional[ImageStore],
    params: GridParams,
) -> List[PatchRecord]:
    counts = Counter(r.label for r in records)
    for label in CLASS_ORDER:
        if label not in counts:
            logger.warning(f"Class {label.value} has no {view.value} patches; it stays empty after balancing")
    target = BalanceTarget.from_counts(mode, counts)
    if all(n == target.target_count_per_class for n in counts.values()):
        return records

    logger.info(
        f"Balancing {view.value} patches by {mode.value} to {target.target_count_per_class} per class "
        f"(was {', '.join(f'{label.value}={counts[label]}' for label in CLASS_ORDER if label in counts)})"
    )

    if mode == BalanceMode.UNDERSAMPLE:
        keep_ids = set()
        for label in CLASS_ORDER:
            members = [i for i, r in enumerate(records) if r.label == label]
            if len(members) > target.target_count_per_class:
                rng = make_rng(params.seed, "undersample", view, label)
                members = rng.choice(members, size=target.target_count_per_class, replace=False).tolist()
            keep_ids.update(members)
        return [r for i, r in enumerate(records) if i in keep_ids]

    if store is None:
        raise ValueError("Over-sampling needs the source images of the corpus")
    extras = []
    for label in CLASS_ORDER:
        missing = target.target_count_per_class - counts.get(label, 0)
        if label in counts and missing > 0:
            rng = make_rng(params.seed, "oversample", view, label)
            extras.extend(_draw_off_grid(label, view, missing, store, params, rng))
    return records + extras


def balance(
    records: Sequence[PatchRecord],
    mode: BalanceMode,
    image_store: Optional[ImageStore],
    params: GridParams,
) -> List[PatchRecord]:
    """Equalize the per-class patch counts within every view.

    Over-sampling raises every class to the largest count with seeded,
    off-grid patches drawn from the class's own images (flagged synthetic);
    under-sampling keeps a seeded subset of every class at the smallest count,
    in the original order. A view that is already balanced is returned
    unchanged, which makes the operation idempotent.

    Raises:
        OversamplingError: If no acceptable off-grid patch can be found for a class.
    """
    mode = BalanceMode(mode)
    records = list(records)
    balanced: List[PatchRecord] = []
    for view in ViewKind:
        view_records = [r for r in records if r.view == view]
        if view_records:
            balanced.extend(_balance_view(view_records, view, mode, image_store, params))
    return balanced
