"""Feature vector assembly, surface/section pairing and block selection."""

from collections import defaultdict
from dataclasses import dataclass
from functools import partial
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from app.configs.params import BLOCK_BINS, FEATURE_BLOCKS, FEATURE_MIN_SIDE, FeatureView, LbpParams, canonical_combo
from app.dataset import CLASS_ORDER, ClassLabel, PatchRecord, ViewKind, frozen_array
from app.features.color import ChannelKind, channel_energy, energy_histogram, rgb_to_hsv_image
from app.features.lbp import lbp_histogram
from app.logging_config import get_logger
from app.utils.parallel import parallel_map
from app.utils.seeding import make_rng

logger = get_logger(__name__)

SINGLE_VIEW_LENGTH = BLOCK_BINS * len(FEATURE_BLOCKS)
MIXED_LENGTH = 2 * SINGLE_VIEW_LENGTH


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Histogram descriptor of a patch (40 components) or of a surface/section pair (80)."""

    components: np.ndarray
    view: FeatureView
    label: ClassLabel
    stone_id: str = ""

    def __post_init__(self):
        components = np.asarray(self.components, dtype=np.float64)
        if components.ndim != 1:
            raise ValueError(f"Feature components must be one-dimensional, got shape {components.shape}")
        object.__setattr__(self, "components", frozen_array(components))
        object.__setattr__(self, "view", FeatureView(self.view))
        object.__setattr__(self, "label", ClassLabel(self.label))

    def __len__(self) -> int:
        return int(self.components.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return (
            self.view == other.view
            and self.label == other.label
            and self.stone_id == other.stone_id
            and np.array_equal(self.components, other.components)
        )

    __hash__ = None


def feature_vector(patch: PatchRecord, lbp: LbpParams) -> FeatureVector:
    """40-component descriptor [eH | eS | eV | LBP] of one patch.

    The energy blocks come from the H, S and V channels; the LBP block from V.

    Raises:
        ValueError: If the patch is smaller than the energy or LBP window needs.
    """
    if patch.side < max(3, lbp.window_side):
        raise ValueError(
            f"Patch side {patch.side} is below the feature minimum of {max(3, lbp.window_side)} pixels"
        )
    hsv = rgb_to_hsv_image(patch.pixels)
    blocks = [
        energy_histogram(channel_energy(hsv[..., i]), kind)
        for i, kind in enumerate((ChannelKind.H, ChannelKind.S, ChannelKind.V))
    ]
    blocks.append(lbp_histogram(hsv[..., 2], lbp))
    return FeatureVector(np.concatenate(blocks), FeatureView(patch.view.value), patch.label, patch.stone_id)


def feature_vectors(records: Sequence[PatchRecord], lbp: LbpParams, workers: int = 1) -> List[FeatureVector]:
    """Descriptors of many patches, in input order."""
    if records and records[0].side < FEATURE_MIN_SIDE:
        logger.warning(f"Patch side {records[0].side} is below {FEATURE_MIN_SIDE}; larger LBP windows cannot run")
    return parallel_map(partial(feature_vector, lbp=lbp), records, workers)


def mixed_vector(surface: FeatureVector, section: FeatureVector) -> FeatureVector:
    """Concatenate a surface and a section descriptor of the same class.

    Raises:
        ValueError: On a class mismatch, a view mismatch or a non-40 length.
    """
    if surface.view != FeatureView.SURFACE or section.view != FeatureView.SECTION:
        raise ValueError(
            f"Mixed vectors need a SURFACE and a SECTION vector, got {surface.view.value} and {section.view.value}"
        )
    if surface.label != section.label:
        raise ValueError(f"Cannot mix class {surface.label.value} with class {section.label.value}")
    if len(surface) != SINGLE_VIEW_LENGTH or len(section) != SINGLE_VIEW_LENGTH:
        raise ValueError(
            f"Mixed vectors need two {SINGLE_VIEW_LENGTH}-component vectors, got {len(surface)} and {len(section)}"
        )
    stone_id = surface.stone_id if surface.stone_id == section.stone_id else f"{surface.stone_id}+{section.stone_id}"
    return FeatureVector(
        np.concatenate([surface.components, section.components]), FeatureView.MIXED, surface.label, stone_id
    )


def _cycle_pair(
    surfaces: List[FeatureVector], sections: List[FeatureVector], rng: np.random.Generator
) -> List[Tuple[FeatureVector, FeatureVector]]:
    """max(m, n) pairs from two shuffled lists, reusing the shorter one cyclically."""
    order_a = rng.permutation(len(surfaces))
    order_b = rng.permutation(len(sections))
    count = max(len(surfaces), len(sections))
    return [
        (surfaces[order_a[i % len(surfaces)]], sections[order_b[i % len(sections)]]) for i in range(count)
    ]


def _pair_class(
    surfaces: List[FeatureVector], sections: List[FeatureVector], rng: np.random.Generator
) -> List[Tuple[FeatureVector, FeatureVector]]:
    by_stone: Dict[str, Tuple[List[FeatureVector], List[FeatureVector]]] = defaultdict(lambda: ([], []))
    for vector in surfaces:
        by_stone[vector.stone_id][0].append(vector)
    for vector in sections:
        by_stone[vector.stone_id][1].append(vector)

    pairs = []
    orphan_surfaces: List[FeatureVector] = []
    orphan_sections: List[FeatureVector] = []
    for stone_surfaces, stone_sections in by_stone.values():
        if stone_surfaces and stone_sections:
            pairs.extend(_cycle_pair(stone_surfaces, stone_sections, rng))
        else:
            orphan_surfaces.extend(stone_surfaces)
            orphan_sections.extend(stone_sections)

    if orphan_surfaces and orphan_sections:
        pairs.extend(_cycle_pair(orphan_surfaces, orphan_sections, rng))
    elif orphan_surfaces:
        partners = _cycled(sections, len(orphan_surfaces), rng)
        pairs.extend(zip(orphan_surfaces, partners))
    elif orphan_sections:
        partners = _cycled(surfaces, len(orphan_sections), rng)
        pairs.extend(zip(partners, orphan_sections))
    return pairs


def _cycled(vectors: List[FeatureVector], count: int, rng: np.random.Generator) -> List[FeatureVector]:
    order = rng.permutation(len(vectors))
    return [vectors[order[i % len(vectors)]] for i in range(count)]


def pair_views(vectors: Iterable[FeatureVector], seed: int) -> List[FeatureVector]:
    """Build mixed vectors from single-view vectors, class by class.

    Surface and section vectors of the same stone are paired first; vectors of
    stones seen in one view only are paired with the remaining other-view
    vectors of their class. Each group is shuffled with a class-derived seed
    and the shorter side is cycled, so a group yields max(m, n) pairs.

    Raises:
        ValueError: If a class has vectors of one view but none of the other.
    """
    surfaces: Dict[ClassLabel, List[FeatureVector]] = defaultdict(list)
    sections: Dict[ClassLabel, List[FeatureVector]] = defaultdict(list)
    for vector in vectors:
        if vector.view == FeatureView.SURFACE:
            surfaces[vector.label].append(vector)
        elif vector.view == FeatureView.SECTION:
            sections[vector.label].append(vector)
        else:
            raise ValueError("pair_views expects single-view vectors, got a MIXED vector")

    mixed = []
    for label in CLASS_ORDER:
        if not surfaces[label] and not sections[label]:
            continue
        if not surfaces[label] or not sections[label]:
            missing = ViewKind.SURFACE if not surfaces[label] else ViewKind.SECTION
            raise ValueError(f"Class {label.value} has no {missing.value} vectors to pair with")
        rng = make_rng(seed, "pair", label)
        pairs = _pair_class(surfaces[label], sections[label], rng)
        mixed.extend(mixed_vector(surface, section) for surface, section in pairs)
        logger.debug(
            f"Class {label.value}: {len(surfaces[label])} surface x {len(sections[label])} section "
            f"-> {len(pairs)} mixed vectors"
        )
    return mixed


def block_indices(combo, length: int) -> np.ndarray:
    """Component indices of the requested blocks for a 40- or 80-component vector.

    Raises:
        ValueError: On an empty combo or an unexpected vector length.
    """
    blocks = canonical_combo(combo)
    if length not in (SINGLE_VIEW_LENGTH, MIXED_LENGTH):
        raise ValueError(f"Block selection needs {SINGLE_VIEW_LENGTH} or {MIXED_LENGTH} components, got {length}")
    indices = []
    for half in range(length // SINGLE_VIEW_LENGTH):
        for block in blocks:
            start = half * SINGLE_VIEW_LENGTH + FEATURE_BLOCKS.index(block) * BLOCK_BINS
            indices.extend(range(start, start + BLOCK_BINS))
    return np.asarray(indices, dtype=np.intp)


def select_features(vector: FeatureVector, combo) -> FeatureVector:
    """Keep only the requested 10-bin blocks, in canonical order within each view half."""
    indices = block_indices(combo, len(vector))
    return FeatureVector(vector.components[indices], vector.view, vector.label, vector.stone_id)


def feature_matrix(vectors: Sequence[FeatureVector]) -> Tuple[np.ndarray, np.ndarray]:
    """Stack vectors into (X, y) with y holding class positions.

    Raises:
        ValueError: If the set is empty or the vectors differ in length.
    """
    if not vectors:
        raise ValueError("Cannot build a feature matrix from an empty set")
    lengths = {len(v) for v in vectors}
    if len(lengths) != 1:
        raise ValueError(f"Feature vectors differ in length: {sorted(lengths)}")
    X = np.vstack([v.components for v in vectors])
    y = np.asarray([v.label.position for v in vectors], dtype=np.intp)
    return X, y
