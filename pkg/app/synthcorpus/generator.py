"""Deterministic synthetic stone corpus.

Every image shows one elliptical "stone" on a pink, red-dominant tissue
background. Inside the mask the pixels follow the class recipe: a base hue
with smooth jitter, a saturation and value range, and a texture kind that
modulates the value channel. Section views use a finer texture and a
brighter rendering than surface views of the same stone.
"""

from functools import partial
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np
from matplotlib.colors import hsv_to_rgb
from PIL import Image

from app.configs.recipes import RecipeEntry
from app.dataset import BinaryMask, ClassLabel, CorpusManifest, ManifestEntry, RgbImage, ViewKind
from app.dataset import save_manifest, save_mask, save_rgb
from app.logging_config import get_logger
from app.utils.parallel import parallel_map
from app.utils.seeding import make_rng

logger = get_logger(__name__)

DEFAULT_IMAGE_SIZE = 768
DEFAULT_IMAGES_PER_CLASS_PER_VIEW = 25
MANIFEST_FILE = "manifest.tsv"

# Ellipse semi-axes as a fraction of the half image size; the mask covers 61-78.5 % of the image
AXIS_RANGE = (0.88, 1.0)
SECTION_SCALE_FACTOR = 0.75
SECTION_BRIGHTNESS = 1.10

TISSUE_HUE = 350.0
TISSUE_HUE_JITTER = 8.0
TISSUE_SATURATION = (0.35, 0.55)
TISSUE_VALUE = (150.0, 220.0)

INSTRUMENT_RGB = (30, 60, 200)


def stone_id_for(label: ClassLabel, index: int) -> str:
    """Stone ids are shared by the surface and section image of a stone."""
    return f"{label.value}-{index:03d}"


def value_noise(rng: np.random.Generator, shape: Tuple[int, int], scale: int) -> np.ndarray:
    """Smooth noise in [0, 1] with features about ``scale`` pixels wide (bilinear value noise)."""
    height, width = shape
    if scale <= 1:
        return rng.random(shape)
    lattice = rng.random((height // scale + 2, width // scale + 2)).astype(np.float32)
    resized = Image.fromarray(lattice).resize((width, height), Image.Resampling.BILINEAR)
    noise = np.asarray(resized, dtype=np.float64)
    low, high = noise.min(), noise.max()
    return (noise - low) / (high - low) if high > low else np.zeros(shape)


def texture_field(rng: np.random.Generator, shape: Tuple[int, int], kind: str, scale: int) -> np.ndarray:
    """Texture modulation in [0, 1] for one of the recipe texture kinds."""
    if kind == "fine-grain":
        return rng.random(shape)
    if kind == "smooth":
        return value_noise(rng, shape, scale)
    if kind == "blotchy":
        noise = value_noise(rng, shape, scale)
        return np.clip((noise - 0.5) * 3.0 + 0.5, 0.0, 1.0)
    if kind == "striped":
        height, width = shape
        angle = rng.uniform(0.0, np.pi)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        yy, xx = np.mgrid[0:height, 0:width]
        stripes = 0.5 + 0.5 * np.sin(2.0 * np.pi * (xx * np.cos(angle) + yy * np.sin(angle)) / scale + phase)
        return 0.85 * stripes + 0.15 * rng.random(shape)
    raise ValueError(f"Unknown texture kind '{kind}'")


def elliptical_mask(rng: np.random.Generator, size: int) -> BinaryMask:
    """Centred ellipse with semi-axes drawn from AXIS_RANGE of the half size."""
    u, v = rng.uniform(*AXIS_RANGE, size=2)
    semi_x, semi_y = size / 2.0 * u, size / 2.0 * v
    centre = (size - 1) / 2.0
    yy, xx = np.mgrid[0:size, 0:size]
    return ((xx - centre) / semi_x) ** 2 + ((yy - centre) / semi_y) ** 2 <= 1.0


def _hsv_image(hue: np.ndarray, saturation: np.ndarray, value: np.ndarray) -> RgbImage:
    hsv = np.stack([np.mod(hue, 360.0) / 360.0, np.clip(saturation, 0, 1), np.clip(value, 0, 255) / 255.0], axis=-1)
    return np.round(hsv_to_rgb(hsv) * 255.0).astype(np.uint8)


def render_image(
    recipe: RecipeEntry, view: ViewKind, size: int, rng: np.random.Generator, instrument: bool = False
) -> Tuple[RgbImage, BinaryMask]:
    """Render one stone image and its mask."""
    shape = (size, size)
    mask = elliptical_mask(rng, size)

    tissue = _hsv_image(
        TISSUE_HUE + TISSUE_HUE_JITTER * (2.0 * value_noise(rng, shape, 64) - 1.0),
        np.interp(value_noise(rng, shape, 48), [0, 1], TISSUE_SATURATION),
        np.interp(value_noise(rng, shape, 32), [0, 1], TISSUE_VALUE),
    )

    scale = recipe.texture_scale
    brightness = 1.0
    if view == ViewKind.SECTION:
        scale = max(1, int(round(scale * SECTION_SCALE_FACTOR)))
        brightness = SECTION_BRIGHTNESS
    texture = texture_field(rng, shape, recipe.texture, scale)
    stone = _hsv_image(
        recipe.base_hue + recipe.hue_jitter * (2.0 * value_noise(rng, shape, 40) - 1.0),
        np.interp(value_noise(rng, shape, 56), [0, 1], recipe.saturation),
        np.interp(texture, [0, 1], recipe.value) * brightness,
    )

    image = np.where(mask[..., None], stone, tissue)
    if instrument:
        band = max(4, size // 12)
        top = int(rng.integers(0, size - band))
        image[top : top + band, :] = INSTRUMENT_RGB
    return image, mask


def _generate_one(
    task: Tuple[RecipeEntry, ViewKind, int], output_dir: Path, size: int, seed: int, instrument: bool
) -> ManifestEntry:
    recipe, view, index = task
    rng = make_rng(seed, "synth", recipe.label, view, index)
    image, mask = render_image(recipe, view, size, rng, instrument)

    stone_id = stone_id_for(recipe.label, index)
    relative = Path(recipe.label.value) / view.value / f"{stone_id}.png"
    save_rgb(image, output_dir / "images" / relative)
    save_mask(mask, output_dir / "masks" / relative)
    return ManifestEntry(Path("images") / relative, Path("masks") / relative, recipe.label, view, stone_id)


def generate_corpus(
    recipes: Sequence[RecipeEntry],
    output_dir: Path,
    image_size: int = DEFAULT_IMAGE_SIZE,
    n_images: int = DEFAULT_IMAGES_PER_CLASS_PER_VIEW,
    seed: int = 0,
    instrument: bool = False,
    workers: int = 1,
) -> CorpusManifest:
    """Write images, masks and ``manifest.tsv`` for every class and view.

    The corpus depends only on (recipes, image_size, n_images, seed,
    instrument): each image draws from its own derived seed, so the files are
    byte-identical across runs and worker counts.

    Raises:
        ValueError: On an empty recipe list or a non-positive count or size.
        OSError: If the output directory cannot be written.
    """
    if not recipes:
        raise ValueError("Synthetic corpus needs at least one recipe")
    if n_images < 1 or image_size < 16:
        raise ValueError(f"Need n_images >= 1 and image_size >= 16, got {n_images} and {image_size}")

    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    tasks: List[Tuple[RecipeEntry, ViewKind, int]] = [
        (recipe, view, index) for recipe in recipes for view in ViewKind for index in range(n_images)
    ]
    logger.info(
        f"Generating {len(tasks)} synthetic images of {image_size}px "
        f"({len(recipes)} classes x {len(ViewKind)} views x {n_images}) in {output_dir}"
    )
    generate = partial(_generate_one, output_dir=output_dir, size=image_size, seed=seed, instrument=instrument)
    entries = parallel_map(generate, tasks, workers)

    manifest = CorpusManifest(tuple(entries), output_dir)
    save_manifest(manifest, output_dir / MANIFEST_FILE)
    return manifest
