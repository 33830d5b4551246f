"""Shared fixtures: random rasters and a tiny synthetic corpus."""

from pathlib import Path

import numpy as np
import pytest

from app.configs.params import GridParams, LbpParams
from app.configs.recipes import RecipesConfig
from app.dataset import ClassLabel, PatchRecord, ViewKind, load_manifest
from app.features.vectors import feature_matrix
from app.pipeline import extract_patches, featurize
from app.synthcorpus import generate_corpus

TINY_IMAGE_SIZE = 160
TINY_IMAGES = 3
TINY_SEED = 7


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_rgb(rng):
    """Factory for random uint8 RGB rasters."""

    def make(height: int, width: int | None = None) -> np.ndarray:
        return rng.integers(0, 256, size=(height, width or height, 3), dtype=np.uint8)

    return make


@pytest.fixture
def make_patch(random_rgb):
    """Factory for patch records with random pixels."""

    def make(
        label: ClassLabel = ClassLabel.WW,
        view: ViewKind = ViewKind.SURFACE,
        stone_id: str = "WW-000",
        side: int = 16,
        origin=(0, 0),
    ) -> PatchRecord:
        return PatchRecord(random_rgb(side), origin, label, view, stone_id)

    return make


@pytest.fixture(scope="session")
def recipes():
    return RecipesConfig().recipes()


@pytest.fixture(scope="session")
def tiny_corpus_dir(tmp_path_factory, recipes) -> Path:
    """Four classes x two views x three stones of 160 px, generated once per session."""
    directory = tmp_path_factory.mktemp("tiny_corpus")
    generate_corpus(recipes, directory, image_size=TINY_IMAGE_SIZE, n_images=TINY_IMAGES, seed=TINY_SEED)
    return directory


@pytest.fixture(scope="session")
def tiny_manifest_path(tiny_corpus_dir) -> Path:
    return tiny_corpus_dir / "manifest.tsv"


@pytest.fixture(scope="session")
def tiny_surface_features(tiny_manifest_path):
    """(X, y) of the 64 px surface grid patches of the tiny corpus, LBP window 5."""
    records = extract_patches(load_manifest(tiny_manifest_path), GridParams(patch_side=64, max_overlap=20))
    return feature_matrix(featurize(records, LbpParams(window_side=5)))


@pytest.fixture
def tiny_grid():
    return GridParams(patch_side=64, max_overlap=20)


@pytest.fixture
def lbp5():
    return LbpParams(window_side=5)


@pytest.fixture
def clusters(rng):
    """Four well separated 2-D clusters of 20 samples, labelled 0..3."""
    centres = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]])
    X = np.vstack([c + rng.normal(scale=0.5, size=(20, 2)) for c in centres])
    y = np.repeat(np.arange(4), 20)
    return X, y
