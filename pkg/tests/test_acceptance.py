"""End-to-end runs over the default synthetic corpus (slow: run with ``pytest -m slow``)."""

import logging
from contextlib import contextmanager

import pytest

from app.cli import EXIT_OK, run
from app.configs.params import FEATURE_BLOCKS, EnsembleKind
from app.configs.presets import PresetsConfig
from app.dataset import load_manifest
from app.evaluation import AblationAxes, read_report_table, run_ablation
from app.utils.metadata import read_sidecar


@contextmanager
def kept_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    try:
        yield
    finally:
        root.handlers[:] = handlers
        root.setLevel(level)


@pytest.fixture(autouse=True)
def restore_logging():
    with kept_logging():
        yield


@pytest.fixture(scope="module")
def default_run(tmp_path_factory):
    """Default corpus, its 256 px patches and surface features, built once per module."""
    root = tmp_path_factory.mktemp("acceptance")
    with kept_logging():
        assert run(["synth", "--output", str(root / "synth"), "--workers", "4"]) == EXIT_OK
        manifest = str(root / "synth" / "manifest.tsv")
        assert run(["extract", "--manifest", manifest, "--output", str(root / "patches"), "--workers", "4"]) == EXIT_OK
        featurize = ["featurize", "--patches", str(root / "patches"), "--workers", "4"]
        assert run(featurize + ["--output", str(root / "features.tsv")]) == EXIT_OK
    return root


def _pooled(report):
    return {(row["evaluation"], row["fold"]): row for row in read_report_table(report)}


def _evaluate(features, report, *extra):
    command = ["evaluate", "--features", str(features), "--output", str(report), "--preset", "desk", "--workers", "4"]
    assert run(command + list(extra)) == EXIT_OK
    return _pooled(report)


@pytest.mark.slow
def test_default_corpus_is_separable(default_run, tmp_path):
    report = tmp_path / "report.tsv"
    rows = _evaluate(default_run / "features.tsv", report, "--oracle")

    forest_f1 = float(rows[("cross-validation", "pooled")]["weighted_f1"])
    assert forest_f1 >= 0.95
    assert float(rows[("nearest-centroid", "pooled")]["weighted_f1"]) <= forest_f1 + 0.02
    meta = read_sidecar(report)
    assert meta["config"]["preset"] == "desk"
    assert meta["config"]["k"] == 5


@pytest.mark.slow
def test_gradient_boosting_is_separable(default_run, tmp_path):
    kind = EnsembleKind.GRADIENT_BOOSTING.value
    rows = _evaluate(default_run / "features.tsv", tmp_path / "report.tsv", "--kind", kind)
    assert float(rows[("cross-validation", "pooled")]["weighted_f1"]) >= 0.95


@pytest.mark.slow
def test_mixed_views_score_at_least_surface(default_run, tmp_path):
    mixed = tmp_path / "mixed.tsv"
    command = ["featurize", "--patches", str(default_run / "patches"), "--output", str(mixed), "--view-mode", "mixed"]
    assert run(command + ["--workers", "4"]) == EXIT_OK

    surface = _evaluate(default_run / "features.tsv", tmp_path / "surface.tsv")[("cross-validation", "pooled")]
    mixed_rows = _evaluate(mixed, tmp_path / "mixed-report.tsv")[("cross-validation", "pooled")]
    assert float(mixed_rows["weighted_f1"]) >= float(surface["weighted_f1"]) - 0.02


@pytest.mark.slow
def test_larger_patches_score_at_least_small_ones(default_run):
    manifest = load_manifest(default_run / "synth" / "manifest.tsv")
    axes = AblationAxes(combos=(FEATURE_BLOCKS,), patch_sides=(64, 256))
    params = PresetsConfig().ensemble_params("desk", EnsembleKind.RANDOM_FOREST)
    result = run_ablation(manifest, axes, params, workers=4)

    (small,) = result.select(patch_side=64)
    (large,) = result.select(patch_side=256)
    assert large.report.accuracy >= small.report.accuracy
