#!/usr/bin/env python3
"""Command-line interface for stonetype.

Each subcommand runs one pipeline stage, writes its artifact plus a
``.meta.yml`` sidecar, and can be chained with the next stage through paths:

    stonetype synth --output runs/synth
    stonetype extract --manifest runs/synth/manifest.tsv --output runs/patches
    stonetype featurize --patches runs/patches --output runs/features.tsv
    stonetype evaluate --features runs/features.tsv --preset desk
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import yaml
from pydantic import ValidationError

from app import __version__
from app.config_loader import config_loader
from app.configs.params import (
    FEATURE_BLOCKS,
    BalanceMode,
    EnsembleKind,
    EnsembleParams,
    FeatureView,
    GridParams,
    GroupingMode,
    LbpParams,
    RunConfig,
    canonical_combo,
)
from app.configs.presets import PRESET_NAMES, PresetsConfig
from app.configs.recipes import RecipesConfig
from app.dataset import ViewKind, load_manifest, load_patches, save_patches
from app.logging_config import get_logger, level_for, setup_logging
from app.utils.metadata import write_sidecar

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INTERRUPTED = 130


class UsageError(ValueError):
    """Invalid arguments or flag combination, detected before any work is done."""


class _ArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports errors through the CLI error channel instead of exiting."""

    def error(self, message: str):
        raise UsageError(message)


def _emit_error(stage: str, exc: BaseException) -> None:
    record = {"error": str(exc).strip() or exc.__class__.__name__, "stage": stage, "type": exc.__class__.__name__}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _default_output(stage: str, name: str) -> Path:
    return config_loader.get_output_root() / stage / name


def _require_file(path: Path, what: str) -> Path:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"{what} not found at {path}")
    return path


def _require_dir(path: Path, what: str) -> Path:
    path = Path(path)
    if not path.is_dir():
        raise UsageError(f"{what} not found at {path}")
    return path


def _run_config(args: argparse.Namespace, **fields: Any) -> RunConfig:
    """Build the validated RunConfig of a stage; raises pydantic ValidationError on bad values."""
    return RunConfig(
        command=args.command,
        preset=args.preset,
        seed=args.seed,
        workers=args.workers,
        **fields,
    )


def _ensemble_params(args: argparse.Namespace) -> EnsembleParams:
    """Preset hyperparameters for the requested learner, with command-line overrides applied."""
    presets = PresetsConfig()
    params = presets.ensemble_params(args.preset, EnsembleKind(args.kind), args.seed)
    overrides: Dict[str, Any] = {}
    if getattr(args, "n_estimators", None) is not None:
        overrides["n_estimators"] = args.n_estimators
    if overrides:
        params = EnsembleParams(**{**params.model_dump(), **overrides})
    return params


def _sidecar(artifact: Path, run: RunConfig, inputs: Sequence[Path] = (), **extra: Any) -> None:
    write_sidecar(
        artifact,
        stage=run.command,
        config=run.model_dump(mode="json"),
        seed=run.seed,
        inputs=[p for p in inputs if Path(p).is_file()],
        extra=extra or None,
    )


def _parse_grid(tokens: Sequence[str]) -> Dict[str, List[Any]]:
    """``key=v1,v2`` tokens into a hyperparameter grid; values are read as YAML scalars."""
    grid: Dict[str, List[Any]] = {}
    for token in tokens:
        key, sep, values = token.partition("=")
        if not sep or not key.strip() or not values.strip():
            raise UsageError(f"Grid entry '{token}' is not of the form key=value[,value...]")
        grid[key.strip()] = [yaml.safe_load(v) for v in values.split(",") if v.strip()]
    return grid


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def cmd_synth(args: argparse.Namespace) -> int:
    """Generate the synthetic corpus (images, masks, manifest)."""
    from app.synthcorpus import MANIFEST_FILE, generate_corpus

    output = Path(args.output) if args.output else _default_output("synth", "")
    if args.images < 1 or args.image_size < 16:
        raise UsageError(f"Need --images >= 1 and --image-size >= 16, got {args.images} and {args.image_size}")
    recipes_file = Path(args.recipes) if args.recipes else config_loader.get_recipes_file()
    _require_file(recipes_file, "Recipes file")
    recipes = RecipesConfig(config_dir=recipes_file.parent, file_name=recipes_file.name).recipes()
    run = _run_config(args, inputs=(str(recipes_file),), output=str(output))

    manifest = generate_corpus(
        recipes,
        output,
        image_size=args.image_size,
        n_images=args.images,
        seed=run.seed,
        instrument=args.instrument,
        workers=run.workers,
    )
    manifest_path = output / MANIFEST_FILE
    _sidecar(
        manifest_path,
        run,
        [recipes_file],
        image_size=args.image_size,
        images_per_class_per_view=args.images,
        instrument=args.instrument,
    )
    logger.info(f"Synthetic corpus of {len(manifest)} images written to {output}")
    return EXIT_OK


def cmd_extract(args: argparse.Namespace) -> int:
    """Cut grid patches out of every manifest image."""
    from app.pipeline import extract_patches

    manifest_path = _require_file(args.manifest, "Manifest")
    output = Path(args.output) if args.output else _default_output("extract", "patches")
    grid = GridParams(
        patch_side=args.patch_side,
        max_overlap=args.max_overlap,
        max_non_stone_fraction=args.max_non_stone,
        seed=args.seed,
    )
    run = _run_config(args, inputs=(str(manifest_path),), output=str(output), grid=grid)

    manifest = load_manifest(manifest_path)
    records = extract_patches(manifest, grid, run.workers, with_augmentation=args.augment)
    count = save_patches(records, output)
    _sidecar(output / "index.tsv", run, [manifest_path], patches=count, augmented=args.augment)
    logger.info(f"Wrote {count} patches to {output}")
    return EXIT_OK


def cmd_balance(args: argparse.Namespace) -> int:
    """Equalise per-class patch counts within each view."""
    from app.pipeline import balance_patches

    patches_dir = _require_dir(args.patches, "Patch directory")
    mode = BalanceMode(args.mode)
    if mode == BalanceMode.OVERSAMPLE and not args.manifest:
        raise UsageError("Over-sampling draws new patches from the source images and needs --manifest")
    manifest_path = _require_file(args.manifest, "Manifest") if args.manifest else None
    output = Path(args.output) if args.output else _default_output("balance", "patches")
    grid = GridParams(
        patch_side=args.patch_side,
        max_overlap=args.max_overlap,
        max_non_stone_fraction=args.max_non_stone,
        seed=args.seed,
    )
    inputs = [patches_dir / "index.tsv"] + ([manifest_path] if manifest_path else [])
    run = _run_config(args, inputs=tuple(map(str, inputs)), output=str(output), grid=grid, balance=mode)

    records = load_patches(patches_dir)
    sides = {r.side for r in records}
    if sides and sides != {grid.patch_side}:
        raise UsageError(f"Patches have side {sorted(sides)} but --patch-side is {grid.patch_side}")
    manifest = load_manifest(manifest_path) if manifest_path else None
    balanced = balance_patches(records, mode, manifest, grid)
    count = save_patches(balanced, output)
    _sidecar(output / "index.tsv", run, inputs, patches=count)
    logger.info(f"Balanced {len(records)} patches into {count} ({mode.value})")
    return EXIT_OK


def cmd_featurize(args: argparse.Namespace) -> int:
    """Compute HSV-energy and LBP feature vectors of a patch directory."""
    from app.features import save_features
    from app.patching import whiten
    from app.pipeline import check_view_mode, featurize

    patches_dir = _require_dir(args.patches, "Patch directory")
    output = Path(args.output) if args.output else _default_output("featurize", "features.tsv")
    lbp = LbpParams(window_side=args.lbp_window)
    run = _run_config(
        args,
        inputs=(str(patches_dir / "index.tsv"),),
        output=str(output),
        lbp=lbp,
        view_mode=args.view_mode,
        combo=args.combo,
    )

    records = load_patches(patches_dir)
    try:
        check_view_mode([r.view for r in records], run.view_mode)
    except ValueError as e:
        raise UsageError(str(e)) from e

    vectors = featurize(records, lbp, run.view_mode, run.combo, run.seed, run.workers)
    save_features(vectors, output, run.combo, lbp)
    _sidecar(output, run, [patches_dir / "index.tsv"], vectors=len(vectors))

    if args.whiten:
        wanted = records
        if run.view_mode != FeatureView.MIXED:
            wanted = [r for r in records if r.view == ViewKind(run.view_mode.value)]
        whitened_path = output.with_suffix(".whitened.npy")
        stack = np.stack([whiten(r.pixels) for r in wanted]).astype(np.float32)
        np.save(whitened_path, stack)
        _sidecar(whitened_path, run, [patches_dir / "index.tsv"], patches=len(wanted), dtype="float32")
        logger.info(f"Wrote {len(wanted)} whitened patches to {whitened_path}")
    logger.info(f"Wrote {len(vectors)} feature vectors to {output}")
    return EXIT_OK


def _load_feature_matrix(path: Path):
    from app.features import feature_matrix, load_features

    features = load_features(path)
    if not features.vectors:
        raise UsageError(f"Feature file {path} holds no vectors")
    X, y = feature_matrix(features.vectors)
    return features, X, y


def cmd_train(args: argparse.Namespace) -> int:
    """Fit a tree ensemble on a feature file and save the model."""
    from app.learners import save_model, train

    features_path = _require_file(args.features, "Feature file")
    output = Path(args.output) if args.output else _default_output("train", "model.json")
    params = _ensemble_params(args)
    run = _run_config(args, inputs=(str(features_path),), output=str(output), ensemble=params)

    features, X, y = _load_feature_matrix(features_path)
    model = train(X, y, params, workers=run.workers)
    save_model(model, output)
    _sidecar(
        output,
        run,
        [features_path],
        n_estimators=params.n_estimators,
        trees=len(model.trees),
        combo=list(features.combo),
    )
    logger.info(f"Trained {params.kind.value} with {params.n_estimators} estimators; model written to {output}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Stratified k-fold evaluation of a learner on a feature file."""
    from app.evaluation import (
        cross_validate,
        evaluation_rows,
        holdout_evaluate,
        holdout_split,
        stratified_kfold,
        write_report,
    )
    from app.evaluation.plots import plot_per_class

    features_path = _require_file(args.features, "Feature file")
    output = Path(args.output) if args.output else _default_output("evaluate", "report.tsv")
    if args.holdout is not None and not 0.0 < args.holdout < 1.0:
        raise UsageError(f"--holdout must be in (0, 1), got {args.holdout}")
    params = _ensemble_params(args)
    run = _run_config(
        args, inputs=(str(features_path),), output=str(output), ensemble=params, k=args.k, grouping=args.grouping
    )

    features, X, y = _load_feature_matrix(features_path)
    groups = [v.stone_id for v in features.vectors]
    folds = stratified_kfold(y, groups, run.k, run.grouping, run.seed)
    report = cross_validate(X, y, params, folds, run.workers)
    rows = evaluation_rows(report, evaluation="cross-validation")

    if args.holdout is not None:
        train_rows, test_rows = holdout_split(y, args.holdout, run.seed)
        holdout = holdout_evaluate(X, y, params, train_rows, test_rows, run.workers)
        rows.append(({"evaluation": "holdout", "fold": "holdout"}, holdout))
    if args.oracle:
        from app.synthcorpus import nearest_centroid_oracle

        rows.append(({"evaluation": "nearest-centroid", "fold": "pooled"}, nearest_centroid_oracle(X, y)))

    table, summary = write_report(rows, output, f"{params.kind.value} on {features_path.name}")
    plot = plot_per_class(report, output.with_suffix(".svg"), f"{params.kind.value} ({run.k}-fold)")
    for artifact in (table, summary, plot):
        _sidecar(artifact, run, [features_path], weighted_f1=report.weighted_f1, accuracy=report.accuracy)
    logger.info(f"Weighted F1 {report.weighted_f1:.4f}, accuracy {report.accuracy:.4f}; report written to {table}")
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    """Sweep feature combinations, patch sides, view modes and LBP windows."""
    from app.evaluation import AblationAxes, run_ablation, write_report
    from app.evaluation.plots import plot_ablation
    from app.pipeline import check_view_mode

    manifest_path = _require_file(args.manifest, "Manifest")
    output = Path(args.output) if args.output else _default_output("ablate", "")
    try:
        combos = tuple(canonical_combo(c) for c in args.combos) if args.combos else None
        axes = AblationAxes(
            **({"combos": combos} if combos else {}),
            patch_sides=tuple(args.patch_sides),
            view_modes=tuple(FeatureView.parse(v) for v in args.view_modes),
            lbp_windows=tuple(args.lbp_windows),
        )
    except ValueError as e:
        raise UsageError(str(e)) from e
    errors = axes.validate()
    if errors:
        raise UsageError("; ".join(errors))
    grid = GridParams(patch_side=max(axes.patch_sides), max_overlap=args.max_overlap, seed=args.seed)
    params = _ensemble_params(args)
    balance_mode = BalanceMode(args.balance) if args.balance else None
    run = _run_config(
        args,
        inputs=(str(manifest_path),),
        output=str(output),
        grid=grid,
        ensemble=params,
        balance=balance_mode,
        k=args.k,
        grouping=args.grouping,
    )
    loss_params = None
    if args.loss_curves:
        presets = PresetsConfig()
        loss_params = presets.ensemble_params(args.preset, EnsembleKind.GRADIENT_BOOSTING, run.seed)

    manifest = load_manifest(manifest_path)
    try:
        for view_mode in axes.view_modes:
            check_view_mode([entry.view for entry in manifest], view_mode)
    except ValueError as e:
        raise UsageError(str(e)) from e
    result = run_ablation(
        manifest,
        axes,
        params,
        grid=grid,
        k=run.k,
        grouping=run.grouping,
        seed=run.seed,
        workers=run.workers,
        balance_mode=balance_mode,
        loss_params=loss_params,
    )
    rows = [(cell.axis_values(), cell.report) for cell in result.cells]
    table, summary = write_report(rows, output / "ablation.tsv", f"Ablation of {params.kind.value}")
    artifacts = [table, summary, *plot_ablation(result, output)]
    if result.loss_curves:
        loss_path = output / "loss_curves.tsv"
        lines = ["patch_side\tstage\tlog_loss"]
        for side, losses in sorted(result.loss_curves.items()):
            lines.extend(f"{side}\t{stage + 1}\t{loss:.9g}" for stage, loss in enumerate(losses))
        with open(loss_path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
        artifacts.append(loss_path)
    for artifact in artifacts:
        _sidecar(artifact, run, [manifest_path], cells=len(result.cells))
    logger.info(f"Ablation of {len(result.cells)} cells written to {output}")
    return EXIT_OK


def cmd_embed(args: argparse.Namespace) -> int:
    """Export a three-dimensional PCA projection of a feature file."""
    from app.evaluation import export_embedding, pca_project
    from app.features import load_features

    features_path = _require_file(args.features, "Feature file")
    output = Path(args.output) if args.output else _default_output("embed", "embedding.tsv")
    run = _run_config(args, inputs=(str(features_path),), output=str(output))

    features = load_features(features_path)
    export = pca_project(features.vectors, out_dim=3)
    export_embedding(export, output)
    _sidecar(
        output,
        run,
        [features_path],
        explained_variance_ratio=[float(r) for r in export.explained_variance_ratio],
        rank_deficient=export.rank_deficient,
    )
    return EXIT_OK


def cmd_tune(args: argparse.Namespace) -> int:
    """Rank a small hyperparameter grid by cross-validated weighted F1."""
    from app.evaluation import expand_grid, grid_search, stratified_kfold

    features_path = _require_file(args.features, "Feature file")
    output = Path(args.output) if args.output else _default_output("tune", "ranking.tsv")
    grid = _parse_grid(args.grid)
    params = _ensemble_params(args)
    try:
        expand_grid(params, grid)
    except ValueError as e:
        raise UsageError(str(e)) from e
    run = _run_config(
        args, inputs=(str(features_path),), output=str(output), ensemble=params, k=args.k, grouping=args.grouping
    )

    features, X, y = _load_feature_matrix(features_path)
    folds = stratified_kfold(y, [v.stone_id for v in features.vectors], run.k, run.grouping, run.seed)
    ranked = grid_search(X, y, params, grid, folds, run.workers)

    keys = list(grid)
    lines = ["\t".join(["rank", *keys, "weighted_f1", "accuracy"])]
    for rank, (overrides, report) in enumerate(ranked, start=1):
        values = [json.dumps(overrides[key]) for key in keys]
        lines.append("\t".join([str(rank), *values, f"{report.weighted_f1:.6f}", f"{report.accuracy:.6f}"]))
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    best = ranked[0][0]
    _sidecar(output, run, [features_path], grid=grid, best=best)
    logger.info(f"Best of {len(ranked)} grid points: {best}")
    return EXIT_OK


COMMANDS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "balance": cmd_balance,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "embed": cmd_embed,
    "tune": cmd_tune,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_grid_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--patch-side", type=int, default=256, help="Patch side in pixels (default: 256)")
    parser.add_argument("--max-overlap", type=int, default=20, help="Maximum overlap of grid patches (default: 20)")
    parser.add_argument(
        "--max-non-stone",
        type=float,
        default=0.10,
        help="Maximum fraction of non-stone or instrument pixels per patch (default: 0.10)",
    )


def _add_learner_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--kind",
        choices=[k.value for k in EnsembleKind],
        default=EnsembleKind.RANDOM_FOREST.value,
        help="Tree-ensemble learner (default: random_forest)",
    )
    parser.add_argument("--n-estimators", type=int, help="Override the preset number of estimators")


def _add_fold_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-k", type=int, default=5, help="Number of folds (default: 5)")
    parser.add_argument(
        "--grouping",
        choices=[g.value for g in GroupingMode],
        default=GroupingMode.PER_PATCH.value,
        help="Keep patches of one stone together with per-stone (default: per-patch)",
    )


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=config_loader.get_default_seed(), help="Master seed")
    common.add_argument(
        "--workers", type=int, default=config_loader.get_default_workers(), help="Worker processes (default: 1)"
    )
    common.add_argument(
        "--preset",
        choices=PRESET_NAMES,
        default=config_loader.get_default_preset(),
        help="Hyperparameter preset: paper (published values) or desk (scaled down)",
    )

    parser = _ArgumentParser(
        description="stonetype - kidney-stone patch classification pipeline",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s synth --output runs/synth
  %(prog)s extract --manifest runs/synth/manifest.tsv --output runs/patches
  %(prog)s balance --patches runs/patches --mode undersample --output runs/balanced
  %(prog)s featurize --patches runs/balanced --view-mode mixed --output runs/features.tsv
  %(prog)s evaluate --features runs/features.tsv --kind gradient_boosting --holdout 0.1
  %(prog)s train --features runs/features.tsv --preset paper --output runs/model.json
  %(prog)s ablate --manifest runs/synth/manifest.tsv --patch-sides 128 256 --output runs/ablation
  %(prog)s tune --features runs/features.tsv --grid n_estimators=25,50 --grid tree.max_depth=5,10
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable verbose (DEBUG) logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors")

    subparsers = parser.add_subparsers(dest="command", help="Pipeline stages")

    synth = subparsers.add_parser("synth", parents=[common], help="Generate the synthetic corpus")
    synth.add_argument("--output", help="Corpus directory (default: <output root>/synth)")
    synth.add_argument("--images", type=int, default=25, help="Images per class and view (default: 25)")
    synth.add_argument("--image-size", type=int, default=768, help="Image side in pixels (default: 768)")
    synth.add_argument("--instrument", action="store_true", help="Draw a blue instrument band into every image")
    synth.add_argument("--recipes", help="Recipes file (default: bundled recipes.yml)")

    extract = subparsers.add_parser("extract", parents=[common], help="Extract grid patches")
    extract.add_argument("--manifest", required=True, help="Corpus manifest (TSV)")
    extract.add_argument("--output", help="Patch directory (default: <output root>/extract/patches)")
    _add_grid_arguments(extract)
    extract.add_argument("--augment", action="store_true", help="Add the seven flipped/rotated/warped copies")

    balance = subparsers.add_parser("balance", parents=[common], help="Balance classes per view")
    balance.add_argument("--patches", required=True, help="Patch directory written by extract")
    balance.add_argument("--mode", choices=[m.value for m in BalanceMode], required=True, help="Balancing mode")
    balance.add_argument("--manifest", help="Corpus manifest, required for oversample")
    balance.add_argument("--output", help="Patch directory (default: <output root>/balance/patches)")
    _add_grid_arguments(balance)

    featurize = subparsers.add_parser("featurize", parents=[common], help="Compute feature vectors")
    featurize.add_argument("--patches", required=True, help="Patch directory")
    featurize.add_argument("--output", help="Feature file (default: <output root>/featurize/features.tsv)")
    featurize.add_argument(
        "--view-mode", choices=["surface", "section", "mixed"], default="surface", help="View mode (default: surface)"
    )
    featurize.add_argument(
        "--combo", default="+".join(FEATURE_BLOCKS), help="Feature blocks, e.g. LBP+eH or eHSV (default: all)"
    )
    featurize.add_argument("--lbp-window", type=int, default=5, help="LBP window side: 5, 7 or 9 (default: 5)")
    featurize.add_argument("--whiten", action="store_true", help="Also export whitened patches as .npy")

    train = subparsers.add_parser("train", parents=[common], help="Train a model")
    train.add_argument("--features", required=True, help="Feature file")
    train.add_argument("--output", help="Model file (default: <output root>/train/model.json)")
    _add_learner_arguments(train)

    evaluate = subparsers.add_parser("evaluate", parents=[common], help="Cross-validate a learner")
    evaluate.add_argument("--features", required=True, help="Feature file")
    evaluate.add_argument("--output", help="Report table (default: <output root>/evaluate/report.tsv)")
    _add_learner_arguments(evaluate)
    _add_fold_arguments(evaluate)
    evaluate.add_argument("--holdout", type=float, help="Also report on a stratified hold-out of this fraction")
    evaluate.add_argument("--oracle", action="store_true", help="Add the nearest-centroid reference row")

    ablate = subparsers.add_parser("ablate", parents=[common], help="Run an ablation sweep")
    ablate.add_argument("--manifest", required=True, help="Corpus manifest (TSV)")
    ablate.add_argument("--output", help="Output directory (default: <output root>/ablate)")
    ablate.add_argument("--combos", nargs="+", help="Feature combinations (default: the seven descriptor rows)")
    ablate.add_argument("--patch-sides", nargs="+", type=int, default=[256], help="Patch sides to sweep")
    ablate.add_argument("--view-modes", nargs="+", default=["surface"], help="View modes to sweep")
    ablate.add_argument("--lbp-windows", nargs="+", type=int, default=[5], help="LBP windows to sweep")
    ablate.add_argument("--max-overlap", type=int, default=20, help="Maximum overlap of grid patches (default: 20)")
    ablate.add_argument("--balance", choices=[m.value for m in BalanceMode], help="Balance patches before featurizing")
    ablate.add_argument("--loss-curves", action="store_true", help="Record gradient-boosting loss per patch side")
    _add_learner_arguments(ablate)
    _add_fold_arguments(ablate)

    embed = subparsers.add_parser("embed", parents=[common], help="Export a 3-D PCA embedding")
    embed.add_argument("--features", required=True, help="Feature file")
    embed.add_argument("--output", help="Embedding TSV (default: <output root>/embed/embedding.tsv)")

    tune = subparsers.add_parser("tune", parents=[common], help="Grid-search hyperparameters")
    tune.add_argument("--features", required=True, help="Feature file")
    tune.add_argument("--output", help="Ranking TSV (default: <output root>/tune/ranking.tsv)")
    tune.add_argument(
        "--grid", action="append", required=True, help="Grid axis key=v1,v2 (repeatable; tree.<field> for tree limits)"
    )
    _add_learner_arguments(tune)
    _add_fold_arguments(tune)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one stage and return its exit code."""
    stage = "cli"
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
    except UsageError as e:
        _emit_error(stage, e)
        return EXIT_USAGE

    setup_logging(level_for(verbose=args.verbose, quiet=args.quiet))

    if not args.command:
        parser.print_help()
        return EXIT_FAILURE

    stage = args.command
    try:
        return COMMANDS[stage](args)
    except KeyboardInterrupt as e:
        logger.info("Interrupted by user")
        _emit_error(stage, e)
        return EXIT_INTERRUPTED
    except (UsageError, ValidationError) as e:
        _emit_error(stage, e)
        return EXIT_USAGE
    except Exception as e:
        logger.debug(f"{stage} failed", exc_info=True)
        _emit_error(stage, e)
        return EXIT_FAILURE


def main(argv: Optional[Sequence[str]] = None) -> None:
    """Main CLI entry point."""
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
