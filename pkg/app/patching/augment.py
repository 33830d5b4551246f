"""Geometric patch augmentation and per-channel whitening."""

from typing import List

import numpy as np
from PIL import Image

from app.dataset import PatchRecord, RgbImage

AUGMENTATIONS = ("original", "hflip", "vflip", "perspective", "rot90", "rot180", "rot270", "shear")
PERSPECTIVE_JITTER = 0.05
SHEAR_FACTOR = 0.1
SIGMA_FLOOR = 1e-12


def _perspective_coefficients(side: int) -> np.ndarray:
    """PIL PERSPECTIVE data mapping the output square onto a slightly skewed source quad."""
    jitter = PERSPECTIVE_JITTER * side
    output = [(0, 0), (side, 0), (side, side), (0, side)]
    source = [(jitter, 0), (side, jitter), (side - jitter, side), (0, side - jitter)]

    rows, rhs = [], []
    for (x, y), (u, v) in zip(output, source):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y])
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y])
        rhs.extend([u, v])
    return np.linalg.solve(np.asarray(rows, dtype=np.float64), np.asarray(rhs, dtype=np.float64))


def _pil_transform(pixels: RgbImage, method: Image.Transform, data) -> RgbImage:
    side = pixels.shape[0]
    image = Image.fromarray(np.ascontiguousarray(pixels, dtype=np.uint8))
    warped = image.transform((side, side), method, tuple(float(c) for c in data), resample=Image.Resampling.BILINEAR)
    return np.asarray(warped, dtype=np.uint8)


def augment_pixels(pixels: RgbImage) -> List[RgbImage]:
    """The eight augmentation variants of a patch raster, original first."""
    pixels = np.asarray(pixels)
    side = pixels.shape[0]
    shear = (1.0, SHEAR_FACTOR, -SHEAR_FACTOR * side / 2.0, 0.0, 1.0, 0.0)
    variants = [
        pixels,
        pixels[:, ::-1],
        pixels[::-1, :],
        _pil_transform(pixels, Image.Transform.PERSPECTIVE, _perspective_coefficients(side)),
        np.rot90(pixels, 1),
        np.rot90(pixels, 2),
        np.rot90(pixels, 3),
        _pil_transform(pixels, Image.Transform.AFFINE, shear),
    ]
    return [np.ascontiguousarray(v) for v in variants]


def augment(record: PatchRecord) -> List[PatchRecord]:
    """Eight records per patch: the original plus seven synthetic geometric variants.

    Variant order is original, horizontal flip, vertical flip, perspective
    warp, rotations by 90, 180 and 270 degrees, shear.
    """
    variants = augment_pixels(record.pixels)
    return [record] + [record.with_pixels(v, synthetic=True) for v in variants[1:]]


def whiten(pixels: np.ndarray) -> np.ndarray:
    """Per-channel standardization (P - mean) / std with population std.

    A constant channel (std below 1e-12) comes out as zeros.
    """
    data = np.asarray(pixels, dtype=np.float64)
    mean = data.mean(axis=(0, 1))
    std = data.std(axis=(0, 1))
    out = np.zeros_like(data)
    varying = std >= SIGMA_FLOOR
    out[..., varying] = (data[..., varying] - mean[varying]) / std[varying]
    return out
