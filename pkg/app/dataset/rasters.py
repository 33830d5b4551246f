"""Raster I/O for corpus images and stone masks."""

from pathlib import Path
from typing import Tuple

import numpy as np
from PIL import Image, UnidentifiedImageError

from app.dataset import BinaryMask, CorpusManifest, ManifestEntry, RgbImage, frozen_array


def _open(path: Path) -> Image.Image:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Raster not found at {path}")
    try:
        image = Image.open(path)
        image.load()
    except (UnidentifiedImageError, OSError) as e:
        raise ValueError(f"Unreadable raster {path}: {e}")
    return image


def load_rgb(path: Path) -> RgbImage:
    """Load an 8-bit RGB raster as a read-only (height, width, 3) uint8 array."""
    with _open(path) as image:
        pixels = np.asarray(image.convert("RGB"), dtype=np.uint8)
    return frozen_array(pixels)


def load_mask(path: Path) -> BinaryMask:
    """Load a stone mask; any non-zero grey value marks a stone pixel."""
    with _open(path) as image:
        grey = np.asarray(image.convert("L"), dtype=np.uint8)
    return frozen_array(grey > 0)


def save_rgb(pixels: RgbImage, path: Path) -> Path:
    """Write an RGB raster as lossless PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8)).save(path, format="PNG")
    return path


def save_mask(mask: BinaryMask, path: Path) -> Path:
    """Write a stone mask as a 0/255 greyscale PNG."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grey = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(grey).save(path, format="PNG")
    return path


def load_image_pair(entry: ManifestEntry, manifest: CorpusManifest | None = None) -> Tuple[RgbImage, BinaryMask]:
    """Load the image and mask of one manifest entry.

    Args:
        entry: Manifest entry
        manifest: Manifest the entry belongs to; relative paths resolve against its root

    Raises:
        FileNotFoundError: If either raster is missing.
        ValueError: If a raster is unreadable or the image and mask dimensions differ.
    """
    image_path = manifest.resolve(entry.image_path) if manifest else entry.image_path
    mask_path = manifest.resolve(entry.mask_path) if manifest else entry.mask_path

    image = load_rgb(image_path)
    mask = load_mask(mask_path)
    if image.shape[:2] != mask.shape:
        raise ValueError(
            f"Dimension mismatch for stone {entry.stone_id}: image {image.shape[1]}x{image.shape[0]}, "
            f"mask {mask.shape[1]}x{mask.shape[0]}"
        )
    return image, mask
