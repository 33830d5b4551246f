"""Tests for grid extraction, instrument rejection, class balancing, augmentation and whitening."""

import logging
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from app.configs.params import BalanceMode, GridParams
from app.dataset import ClassLabel, ManifestEntry, PatchRecord, ViewKind
from app.patching import (
    AUGMENTATIONS,
    BalanceTarget,
    ImageStore,
    OversamplingError,
    augment,
    augment_pixels,
    balance,
    detect_instrument,
    extract_patch_grid,
    grid_anchors,
    whiten,
)
from app.patching.grid import axis_anchors, crop_padded, non_stone_fraction


def _entry(label=ClassLabel.WW, view=ViewKind.SURFACE, stone_id="S0") -> ManifestEntry:
    return ManifestEntry(Path(f"{stone_id}.png"), Path(f"{stone_id}_mask.png"), label, view, stone_id)


def _disc(size: int, radius: float) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size]
    centre = (size - 1) / 2.0
    return (xx - centre) ** 2 + (yy - centre) ** 2 <= radius**2


def _random_blobs(size: int, rng: np.random.Generator) -> np.ndarray:
    """Union of two to four random ellipses."""
    yy, xx = np.mgrid[0:size, 0:size]
    mask = np.zeros((size, size), dtype=bool)
    for _ in range(int(rng.integers(2, 5))):
        cx, cy = rng.uniform(0.2 * size, 0.8 * size, size=2)
        rx, ry = rng.uniform(0.15 * size, 0.45 * size, size=2)
        mask |= ((xx - cx) / rx) ** 2 + ((yy - cy) / ry) ** 2 <= 1.0
    return mask


class TestGrid:
    def test_axis_anchors_with_flush(self):
        assert axis_anchors(0, 531, 256, 236) == ([0, 236], 276)

    def test_axis_anchors_exact_fit(self):
        assert axis_anchors(0, 255, 256, 236) == ([0], None)

    def test_full_stone_532_region_gives_nine_patches(self, random_rgb):
        image = random_rgb(532)
        image[..., 2] = 0
        mask = np.ones((532, 532), dtype=bool)
        params = GridParams(patch_side=256, max_overlap=20)
        records = extract_patch_grid(image, mask, params, _entry())
        assert sorted(r.origin for r in records) == sorted((x, y) for x in (0, 236, 276) for y in (0, 236, 276))
        assert all(r.side == 256 for r in records)
        first = next(r for r in records if r.origin == (0, 0))
        assert np.array_equal(first.pixels, image[:256, :256])

    def test_single_patch_region(self, random_rgb):
        image = random_rgb(256)
        image[..., 2] = 0
        records = extract_patch_grid(image, np.ones((256, 256), dtype=bool), GridParams(), _entry())
        assert [r.origin for r in records] == [(0, 0)]

    def test_empty_mask(self, random_rgb):
        assert extract_patch_grid(random_rgb(300), np.zeros((300, 300), dtype=bool), GridParams(), _entry()) == []

    def test_anchor_order_is_row_major(self):
        anchors = grid_anchors(np.ones((532, 532), dtype=bool), GridParams())
        assert [(a.x, a.y) for a in anchors[:3]] == [(0, 0), (236, 0), (276, 0)]
        assert anchors[2].flush_x and not anchors[2].flush_y

    def test_strided_neighbours_overlap_by_max_overlap(self):
        params = GridParams(patch_side=64, max_overlap=20)
        anchors, _ = axis_anchors(0, 299, params.patch_side, params.stride)
        assert all(b - a == params.stride for a, b in zip(anchors, anchors[1:]))
        assert params.patch_side - params.stride == 20

    def test_retained_anchors_match_brute_force_count(self):
        params = GridParams(patch_side=64, max_overlap=20)
        image = np.full((200, 200, 3), (180, 140, 90), dtype=np.uint8)
        partly_rejected = 0
        for seed in range(100):
            mask = _random_blobs(200, np.random.default_rng(seed))
            anchors = grid_anchors(mask, params)
            acceptable = set()
            for anchor in anchors:
                inside = int(mask[anchor.y : anchor.y + 64, anchor.x : anchor.x + 64].sum())
                if (64 * 64 - inside) / (64 * 64) <= 0.10:
                    acceptable.add((anchor.x, anchor.y))
            retained = {r.origin for r in extract_patch_grid(image, mask, params, _entry())}
            assert retained == acceptable, f"seed {seed}"
            partly_rejected += 0 < len(retained) < len(anchors)
        assert partly_rejected > 10

    def test_patch_outside_image_reads_zero(self):
        mask = np.zeros((4, 4), dtype=bool)
        crop = crop_padded(np.ones((4, 4), dtype=bool), 2, 2, 4)
        assert crop.sum() == 4
        assert non_stone_fraction(mask) == 1.0

    def test_dimension_mismatch(self, random_rgb):
        with pytest.raises(ValueError, match="dimensions differ"):
            extract_patch_grid(random_rgb(64), np.ones((64, 32), dtype=bool), GridParams(patch_side=64), _entry())

    def test_patchless_stone_warns(self, random_rgb, caplog):
        image = random_rgb(128)
        mask = _disc(128, 30)
        records = extract_patch_grid(image, mask, GridParams(patch_side=64, max_overlap=20), _entry())
        assert records == []
        assert "No acceptable" in caplog.text


class TestInstrument:
    def test_red_and_blue(self):
        red = np.zeros((8, 8, 3), dtype=np.uint8)
        red[..., 0] = 255
        blue = np.zeros((8, 8, 3), dtype=np.uint8)
        blue[..., 2] = 255
        assert detect_instrument(red) == 0.0
        assert detect_instrument(blue) == 1.0
        half = np.concatenate([red[:4], blue[:4]])
        assert detect_instrument(half) == 0.5

    def test_instrument_band_rejects_patch(self):
        image = np.full((256, 256, 3), (200, 120, 60), dtype=np.uint8)
        mask = np.ones((256, 256), dtype=bool)
        assert len(extract_patch_grid(image, mask, GridParams(), _entry())) == 1
        image[100:140] = (30, 60, 200)
        assert extract_patch_grid(image, mask, GridParams(), _entry()) == []


def _records(counts, view=ViewKind.SURFACE, side=64):
    pixels = np.full((side, side, 3), 128, dtype=np.uint8)
    records = []
    for label, n in zip((ClassLabel.WW, ClassLabel.WD, ClassLabel.UA, ClassLabel.BRU), counts):
        records.extend(PatchRecord(pixels, (i, 0), label, view, f"{label.value}-{i % 5}") for i in range(n))
    return records


def _full_store(view=ViewKind.SURFACE, size=80):
    image = np.full((size, size, 3), (180, 140, 90), dtype=np.uint8)
    mask = np.ones((size, size), dtype=bool)
    items = []
    for label in ClassLabel:
        for i in range(2):
            items.append((_entry(label, view, f"{label.value}-{i}"), image, mask))
    return ImageStore.from_arrays(items)


CLINICAL_COUNTS = (870, 920, 470, 420)


class TestBalance:
    def test_target_rule(self):
        counts = dict(zip(ClassLabel, CLINICAL_COUNTS))
        assert BalanceTarget.from_counts(BalanceMode.OVERSAMPLE, counts).target_count_per_class == 920
        assert BalanceTarget.from_counts(BalanceMode.UNDERSAMPLE, counts).target_count_per_class == 420

    def test_undersample_clinical_counts(self):
        records = _records(CLINICAL_COUNTS)
        balanced = balance(records, BalanceMode.UNDERSAMPLE, None, GridParams(patch_side=64, seed=3))
        assert set(Counter(r.label for r in balanced).values()) == {420}
        index = {id(r): i for i, r in enumerate(records)}
        positions = [index[id(r)] for r in balanced]
        assert positions == sorted(positions)

    def test_oversample_clinical_counts(self):
        records = _records(CLINICAL_COUNTS)
        params = GridParams(patch_side=64, max_overlap=20, seed=3)
        balanced = balance(records, BalanceMode.OVERSAMPLE, _full_store(), params)
        assert set(Counter(r.label for r in balanced).values()) == {920}
        assert balanced[: len(records)] == records
        extras = balanced[len(records) :]
        assert all(r.synthetic for r in extras)
        anchors = {(a.x, a.y) for a in grid_anchors(np.ones((80, 80), dtype=bool), params)}
        assert not any(r.origin in anchors for r in extras)

    @pytest.mark.parametrize("mode", [BalanceMode.OVERSAMPLE, BalanceMode.UNDERSAMPLE])
    def test_balanced_input_unchanged(self, mode):
        records = _records((100, 100, 100, 100))
        assert balance(records, mode, _full_store(), GridParams(patch_side=64)) == records

    @pytest.mark.parametrize("mode", [BalanceMode.OVERSAMPLE, BalanceMode.UNDERSAMPLE])
    def test_idempotent(self, mode):
        params = GridParams(patch_side=64, max_overlap=20, seed=5)
        store = _full_store()
        once = balance(_records((12, 9, 7, 10)), mode, store, params)
        assert balance(once, mode, store, params) == once

    def test_seeded(self):
        params = GridParams(patch_side=64, max_overlap=20, seed=5)
        first = balance(_records((12, 9, 7, 10)), BalanceMode.OVERSAMPLE, _full_store(), params)
        second = balance(_records((12, 9, 7, 10)), BalanceMode.OVERSAMPLE, _full_store(), params)
        assert first == second

    def test_views_are_balanced_separately(self):
        records = _records((6, 4, 5, 3)) + _records((2, 2, 2, 5), view=ViewKind.SECTION)
        balanced = balance(records, BalanceMode.UNDERSAMPLE, None, GridParams(patch_side=64))
        counts = Counter((r.view, r.label) for r in balanced)
        assert {n for (view, _), n in counts.items() if view == ViewKind.SURFACE} == {3}
        assert {n for (view, _), n in counts.items() if view == ViewKind.SECTION} == {2}

    def test_oversample_needs_images(self):
        with pytest.raises(ValueError, match="source images"):
            balance(_records((3, 2, 2, 2)), BalanceMode.OVERSAMPLE, None, GridParams(patch_side=64))

    def test_impossible_oversample_names_class(self):
        image = np.full((80, 80, 3), 150, dtype=np.uint8)
        small = _disc(80, 6)
        full = np.ones((80, 80), dtype=bool)
        store = ImageStore.from_arrays(
            [(_entry(label, stone_id=label.value), image, small if label == ClassLabel.UA else full) for label in ClassLabel]
        )
        with pytest.raises(OversamplingError) as excinfo:
            balance(_records((3, 3, 1, 3)), BalanceMode.OVERSAMPLE, store, GridParams(patch_side=64))
        assert excinfo.value.label == ClassLabel.UA
        assert "UA" in str(excinfo.value)

    def test_absent_class_is_reported(self, caplog):
        records = _records((3, 0, 2, 2), view=ViewKind.SECTION)
        with caplog.at_level(logging.WARNING, logger="app.patching.balance"):
            balanced = balance(records, BalanceMode.UNDERSAMPLE, None, GridParams(patch_side=64))
        assert Counter(r.label for r in balanced) == {ClassLabel.WW: 2, ClassLabel.UA: 2, ClassLabel.BRU: 2}
        warnings = [r.getMessage() for r in caplog.records if r.levelno == logging.WARNING]
        assert warnings == ["Class WD has no SECTION patches; it stays empty after balancing"]


class TestAugment:
    def test_eight_variants(self, make_patch):
        patch = make_patch(side=32)
        variants = augment(patch)
        assert len(variants) == len(AUGMENTATIONS) == 8
        assert variants[0] is patch
        assert all(v.synthetic for v in variants[1:])
        assert all(v.pixels.shape == (32, 32, 3) for v in variants)

    def test_deterministic(self, random_rgb):
        pixels = random_rgb(32)
        for a, b in zip(augment_pixels(pixels), augment_pixels(pixels)):
            assert np.array_equal(a, b)

    def test_flip_is_involution(self, random_rgb):
        pixels = random_rgb(16)
        hflip = augment_pixels(pixels)[1]
        assert np.array_equal(augment_pixels(hflip)[1], pixels)

    def test_four_quarter_turns(self, random_rgb):
        pixels = random_rgb(16)
        rotated = pixels
        for _ in range(4):
            rotated = augment_pixels(rotated)[4]
        assert np.array_equal(rotated, pixels)

    def test_warps_change_pixels(self, random_rgb):
        pixels = random_rgb(64)
        variants = augment_pixels(pixels)
        assert not np.array_equal(variants[3], pixels)
        assert not np.array_equal(variants[7], pixels)


class TestWhiten:
    def test_constant_patch(self):
        assert np.array_equal(whiten(np.full((8, 8, 3), 77, dtype=np.uint8)), np.zeros((8, 8, 3)))

    def test_two_valued_channel(self):
        pixels = np.zeros((4, 4, 3), dtype=np.uint8)
        pixels[:2] = 255
        out = whiten(pixels)
        assert set(np.unique(out)) == {-1.0, 1.0}

    def test_moments(self, random_rgb):
        out = whiten(random_rgb(32))
        assert np.allclose(out.mean(axis=(0, 1)), 0.0, atol=1e-9)
        assert np.allclose(out.std(axis=(0, 1)), 1.0, atol=1e-6)

    def test_idempotent(self, random_rgb):
        once = whiten(random_rgb(32))
        assert np.allclose(whiten(once), once, atol=1e-9)

    def test_constant_channel_among_varying(self, random_rgb):
        pixels = random_rgb(16)
        pixels[..., 1] = 9
        out = whiten(pixels)
        assert np.all(out[..., 1] == 0.0)
        assert out[..., 0].std() == pytest.approx(1.0)
