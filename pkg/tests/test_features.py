"""Tests for HSV energies, riu2 LBP, feature vectors, view pairing and feature files."""

import math

import numpy as np
import pytest

from app.configs.params import FeatureView, LbpParams
from app.dataset import ClassLabel, PatchRecord, ViewKind
from app.features.lbp import neighbour_samples
from app.features import (
    MIXED_LENGTH,
    SINGLE_VIEW_LENGTH,
    ChannelKind,
    FeatureFileError,
    FeatureVector,
    block_indices,
    channel_energy,
    energy_histogram,
    feature_matrix,
    feature_vector,
    lbp_codes,
    lbp_histogram,
    load_features,
    mixed_vector,
    pair_views,
    rgb_to_hsv,
    rgb_to_hsv_image,
    save_features,
    select_features,
)


def _naive_riu2_codes(grey: np.ndarray, window_side: int) -> np.ndarray:
    """Per-pixel riu2 codes with trigonometric circle sampling and textbook bilinear interpolation."""
    r = (window_side - 1) // 2
    h, w = grey.shape
    codes = np.zeros((h - 2 * r, w - 2 * r), dtype=int)
    for y in range(r, h - r):
        for x in range(r, w - r):
            bits = []
            for k in range(8):
                angle = k * math.pi / 4
                sx = x + r * math.cos(angle)
                sy = y - r * math.sin(angle)
                sx = round(sx) if abs(sx - round(sx)) < 1e-9 else sx
                sy = round(sy) if abs(sy - round(sy)) < 1e-9 else sy
                x0, y0 = math.floor(sx), math.floor(sy)
                fx, fy = sx - x0, sy - y0
                x1, y1 = min(x0 + 1, w - 1), min(y0 + 1, h - 1)
                top = grey[y0, x0] + fx * (grey[y0, x1] - grey[y0, x0])
                bottom = grey[y1, x0] + fx * (grey[y1, x1] - grey[y1, x0])
                sample = top + fy * (bottom - top)
                bits.append(1 if sample >= grey[y, x] else 0)
            transitions = sum(bits[i] != bits[i - 1] for i in range(8))
            codes[y - r, x - r] = sum(bits) if transitions <= 2 else 9
    return codes


def _patch(pixels, label=ClassLabel.WW, view=ViewKind.SURFACE, stone_id="S0") -> PatchRecord:
    return PatchRecord(np.asarray(pixels, dtype=np.uint8), (0, 0), label, view, stone_id)


def _vector(label=ClassLabel.WW, view=FeatureView.SURFACE, stone_id="S0", fill=0.0) -> FeatureVector:
    return FeatureVector(np.full(SINGLE_VIEW_LENGTH, fill), view, label, stone_id)


class TestHsv:
    def test_achromatic(self):
        assert rgb_to_hsv((100, 100, 100)) == (0.0, 0.0, 100.0)

    def test_pure_red(self):
        assert rgb_to_hsv((255, 0, 0)) == (0.0, 1.0, 255.0)

    def test_cyan_tie(self):
        h, s, v = rgb_to_hsv((0, 128, 128))
        assert h == pytest.approx(180.0)
        assert (s, v) == (1.0, 128.0)

    def test_black(self):
        assert rgb_to_hsv((0, 0, 0)) == (0.0, 0.0, 0.0)

    def test_hue_range(self, random_rgb):
        hsv = rgb_to_hsv_image(random_rgb(32))
        assert np.all((hsv[..., 0] >= 0) & (hsv[..., 0] < 360))
        assert np.all((hsv[..., 1] >= 0) & (hsv[..., 1] <= 1))

    def test_blue_and_magenta(self):
        assert rgb_to_hsv((0, 0, 255)).h == pytest.approx(240.0)
        assert rgb_to_hsv((255, 0, 255)).h == pytest.approx(300.0)


class TestEnergy:
    def test_constant(self):
        assert np.all(channel_energy(np.full((6, 6), 42.0)) == 0.0)

    def test_ramp(self):
        ramp = np.tile(np.arange(7, dtype=float), (5, 1))
        energy = channel_energy(ramp)
        assert energy.shape == (3, 5)
        assert np.all(energy == 2.0)

    def test_single_bright_pixel(self):
        field = np.zeros((5, 5))
        field[2, 2] = 1.0
        expected = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=float)
        assert np.array_equal(channel_energy(field), expected)

    def test_too_small(self):
        with pytest.raises(ValueError):
            channel_energy(np.zeros((2, 5)))

    def test_energy_max_per_channel(self):
        assert ChannelKind.H.energy_max == pytest.approx(2 * math.sqrt(2) * 360)
        assert ChannelKind.S.energy_max == pytest.approx(2 * math.sqrt(2))
        assert ChannelKind.V.energy_max == pytest.approx(2 * math.sqrt(2) * 255)


class TestEnergyHistogram:
    def test_all_zero(self):
        hist = energy_histogram(np.zeros((4, 4)), ChannelKind.V)
        assert hist[0] == 1.0 and hist.sum() == 1.0

    def test_ramp_energy_in_first_bin(self):
        hist = energy_histogram(np.full((4, 4), 2.0), ChannelKind.V)
        assert hist[0] == 1.0

    def test_clamps_into_last_bin(self):
        hist = energy_histogram(np.array([[10.0, 1e6]]), ChannelKind.S)
        assert hist[-1] == 1.0

    def test_uniform_energies(self, rng):
        e_max = ChannelKind.H.energy_max
        hist = energy_histogram(rng.uniform(0, e_max, size=(200, 100)), ChannelKind.H)
        assert hist.sum() == pytest.approx(1.0)
        assert np.allclose(hist, 0.1, atol=0.02)

    def test_hand_binned(self):
        e_max = ChannelKind.S.energy_max
        energies = np.array([0.05, 0.15, 0.95, 0.95]) * e_max
        hist = energy_histogram(energies, ChannelKind.S)
        expected = np.zeros(10)
        expected[[0, 1]] = 0.25
        expected[9] = 0.5
        assert np.allclose(hist, expected)

    def test_empty(self):
        with pytest.raises(ValueError):
            energy_histogram(np.zeros((0, 0)), ChannelKind.H)


class TestLbp:
    def test_constant_raster(self):
        hist = lbp_histogram(np.full((9, 9), 7.0), LbpParams(window_side=5))
        assert hist[8] == 1.0

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_naive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        window = (5, 7, 9)[seed % 3]
        shape = (16, 16) if seed % 2 == 0 else tuple(int(s) for s in rng.integers(window, 21, size=2))
        grey = rng.random(shape) * 255.0
        params = LbpParams(window_side=window)
        expected = _naive_riu2_codes(grey, window)
        assert np.array_equal(lbp_codes(grey, params), expected)
        assert np.array_equal(lbp_histogram(grey, params), np.bincount(expected.ravel(), minlength=10) / expected.size)

    @pytest.mark.parametrize("window", [5, 7, 9])
    def test_rotation_invariance(self, random_rgb, window):
        grey = random_rgb(24)[..., 2].astype(float)
        params = LbpParams(window_side=window)
        hist = lbp_histogram(grey, params)
        for turns in (1, 2, 3):
            assert np.array_equal(lbp_histogram(np.rot90(grey, turns), params), hist)

    def test_codes_range(self, random_rgb):
        codes = lbp_codes(random_rgb(20)[..., 0], LbpParams())
        assert codes.min() >= 0 and codes.max() <= 9

    def test_raster_smaller_than_window(self):
        with pytest.raises(ValueError, match="window"):
            lbp_histogram(np.zeros((6, 6)), LbpParams(window_side=7))


class TestFeatureVector:
    def test_constant_grey_patch(self):
        vector = feature_vector(_patch(np.full((16, 16, 3), 90)), LbpParams())
        expected = np.zeros(40)
        expected[[0, 10, 20, 38]] = 1.0
        assert np.array_equal(vector.components, expected)
        assert vector.view == FeatureView.SURFACE
        assert vector.label == ClassLabel.WW

    def test_blocks_are_probability_vectors(self, random_rgb):
        vector = feature_vector(_patch(random_rgb(32)), LbpParams(window_side=9))
        assert len(vector) == 40
        blocks = vector.components.reshape(4, 10)
        assert np.all(blocks >= 0)
        assert np.allclose(blocks.sum(axis=1), 1.0, atol=1e-9)

    def test_intensity_scaling_keeps_hue_and_saturation_energy(self, rng):
        pixels = rng.integers(0, 128, size=(32, 32, 3)) * 2
        bright = feature_vector(_patch(pixels), LbpParams())
        dark = feature_vector(_patch(pixels // 2), LbpParams())
        assert np.array_equal(bright.components[:20], dark.components[:20])

    @pytest.mark.parametrize("k", [0.5, 0.8])
    def test_global_scaling_keeps_hue_saturation_and_texture(self, random_rgb, k):
        pixels = random_rgb(64).astype(np.float64)
        hsv, scaled = rgb_to_hsv_image(pixels), rgb_to_hsv_image(pixels * k)
        for i, kind in ((0, ChannelKind.H), (1, ChannelKind.S)):
            energy = channel_energy(hsv[..., i])
            before = energy_histogram(energy, kind) * energy.size
            after = energy_histogram(channel_energy(scaled[..., i]), kind) * energy.size
            crossings = np.abs(np.rint(before - after)).sum() / 2
            assert crossings <= energy.size / 1000

        params = LbpParams()
        r = params.radius
        # a diagonal sample can equal its centre exactly on integer data; rounding then decides the bit
        tied = np.zeros((64 - 2 * r, 64 - 2 * r), dtype=bool)
        for grey in (hsv[..., 2], scaled[..., 2]):
            centre = grey[r:-r, r:-r]
            for sample in neighbour_samples(grey, r):
                gap = np.abs(sample - centre)
                tied |= (gap > 0) & (gap < 1e-9)
        assert tied.mean() <= 0.001
        codes, codes_scaled = lbp_codes(hsv[..., 2], params), lbp_codes(scaled[..., 2], params)
        assert np.array_equal(codes[~tied], codes_scaled[~tied])
        if not tied.any():
            assert np.array_equal(lbp_histogram(hsv[..., 2], params), lbp_histogram(scaled[..., 2], params))

    def test_patch_below_feature_minimum(self, random_rgb):
        with pytest.raises(ValueError, match="feature minimum"):
            feature_vector(_patch(random_rgb(4)), LbpParams(window_side=5))


class TestMixedVectors:
    def test_concatenation(self):
        surface = FeatureVector(np.arange(40, dtype=float), FeatureView.SURFACE, ClassLabel.UA, "UA-1")
        section = _vector(ClassLabel.UA, FeatureView.SECTION, "UA-1", 0.5)
        mixed = mixed_vector(surface, section)
        assert len(mixed) == MIXED_LENGTH
        assert mixed.view == FeatureView.MIXED
        assert np.array_equal(mixed.components[:40], surface.components)
        assert mixed.stone_id == "UA-1"

    def test_class_mismatch(self):
        with pytest.raises(ValueError, match="Cannot mix"):
            mixed_vector(_vector(ClassLabel.WW), _vector(ClassLabel.WD, FeatureView.SECTION))

    def test_view_mismatch(self):
        with pytest.raises(ValueError, match="SURFACE and a SECTION"):
            mixed_vector(_vector(), _vector())

    @pytest.mark.parametrize("m,n", [(5, 3), (2, 7), (4, 4)])
    def test_pairing_count_distinct_stones(self, m, n):
        surfaces = [_vector(stone_id=f"a{i}", fill=i) for i in range(m)]
        sections = [_vector(view=FeatureView.SECTION, stone_id=f"b{i}", fill=i) for i in range(n)]
        mixed = pair_views(surfaces + sections, seed=1)
        assert len(mixed) == max(m, n)
        assert {v.components[0] for v in mixed} == set(range(m))
        assert {v.components[40] for v in mixed} == set(range(n))

    def test_pairing_prefers_same_stone(self):
        vectors = [
            _vector(stone_id="s1", fill=1),
            _vector(stone_id="s2", fill=2),
            _vector(view=FeatureView.SECTION, stone_id="s2", fill=2),
            _vector(view=FeatureView.SECTION, stone_id="s1", fill=1),
        ]
        mixed = pair_views(vectors, seed=3)
        assert sorted(v.stone_id for v in mixed) == ["s1", "s2"]
        assert all(v.components[0] == v.components[40] for v in mixed)

    def test_pairing_is_seeded(self):
        vectors = [_vector(stone_id=f"a{i}", fill=i) for i in range(6)]
        vectors += [_vector(view=FeatureView.SECTION, stone_id=f"b{i}", fill=i) for i in range(4)]
        assert pair_views(vectors, seed=9) == pair_views(vectors, seed=9)

    def test_missing_view(self):
        with pytest.raises(ValueError, match="no SECTION"):
            pair_views([_vector()], seed=0)


class TestSelection:
    def test_single_block(self):
        vector = FeatureVector(np.arange(40, dtype=float), FeatureView.SURFACE, ClassLabel.WW)
        assert np.array_equal(select_features(vector, ["eH"]).components, np.arange(10))

    def test_all_blocks_identity(self):
        vector = FeatureVector(np.arange(40, dtype=float), FeatureView.SURFACE, ClassLabel.WW)
        assert select_features(vector, ["LBP", "eH", "eS", "eV"]) == vector

    def test_mixed_two_blocks(self):
        indices = block_indices(["LBP", "eH"], 80)
        assert len(indices) == 40
        expected = list(range(0, 10)) + list(range(30, 40)) + list(range(40, 50)) + list(range(70, 80))
        assert indices.tolist() == expected

    def test_empty_combo(self):
        with pytest.raises(ValueError):
            block_indices([], 40)

    def test_feature_matrix(self):
        X, y = feature_matrix([_vector(ClassLabel.BRU), _vector(ClassLabel.WD)])
        assert X.shape == (2, 40)
        assert y.tolist() == [3, 1]


class TestFeatureStore:
    def test_save_and_load(self, tmp_path, random_rgb):
        vectors = [feature_vector(_patch(random_rgb(16), stone_id=f"WW-{i}"), LbpParams()) for i in range(3)]
        path = tmp_path / "features.tsv"
        save_features(vectors, path, ("eH", "eS", "eV", "LBP"), LbpParams(window_side=7))
        assert path.read_text().splitlines()[0] == "# combo=eH+eS+eV+LBP lbp_window=7 lbp_neighbors=8 lbp_mapping=riu2"

        loaded = load_features(path)
        assert loaded.combo == ("eH", "eS", "eV", "LBP")
        assert loaded.lbp.window_side == 7
        assert loaded.view == FeatureView.SURFACE
        assert loaded.views == (FeatureView.SURFACE,)
        assert [v.stone_id for v in loaded.vectors] == ["WW-0", "WW-1", "WW-2"]
        for original, reread in zip(vectors, loaded.vectors):
            assert np.allclose(original.components, reread.components, rtol=1e-8)

    def test_views_of_a_file_with_several_views(self, tmp_path):
        path = tmp_path / "features.tsv"
        vectors = [_vector(view=FeatureView.SECTION, stone_id="B"), _vector(view=FeatureView.SURFACE, stone_id="A")]
        save_features(vectors, path, ("eH", "eS", "eV", "LBP"), LbpParams())
        loaded = load_features(path)
        assert loaded.views == (FeatureView.SURFACE, FeatureView.SECTION)
        with pytest.raises(ValueError, match="single view"):
            loaded.view

    def test_missing_header(self, tmp_path):
        path = tmp_path / "f.tsv"
        path.write_text("WW\tSURFACE\tS\t0.1,0.9\n")
        with pytest.raises(FeatureFileError, match="header"):
            load_features(path)

    def test_bad_record(self, tmp_path):
        path = tmp_path / "f.tsv"
        path.write_text("# combo=eH lbp_window=5\nWW\tSURFACE\tS\t0.1,abc\n")
        with pytest.raises(FeatureFileError, match=":2:"):
            load_features(path)

    def test_inconsistent_lengths(self, tmp_path):
        path = tmp_path / "f.tsv"
        path.write_text("# combo=eH lbp_window=5\nWW\tSURFACE\tS\t0.1,0.9\nWD\tSURFACE\tT\t1.0\n")
        with pytest.raises(FeatureFileError, match="differ in length"):
            load_features(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_features(tmp_path / "none.tsv")
