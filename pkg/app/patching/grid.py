"""Square patch grid extraction over masked stone images."""

from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from app.configs.params import GridParams
from app.dataset import BinaryMask, ManifestEntry, PatchRecord, RgbImage
from app.logging_config import get_logger

logger = get_logger(__name__)


class BoundingBox(NamedTuple):
    """Inclusive pixel bounds of the stone region."""

    x0: int
    y0: int
    x1: int
    y1: int


class Anchor(NamedTuple):
    """Grid cell origin; flush anchors close the grid at the bounding-box maximum."""

    x: int
    y: int
    flush_x: bool
    flush_y: bool


def stone_bbox(mask: BinaryMask) -> Optional[BoundingBox]:
    """Bounding box of the stone pixels, or None for an empty mask."""
    rows = np.flatnonzero(mask.any(axis=1))
    if rows.size == 0:
        return None
    cols = np.flatnonzero(mask.any(axis=0))
    return BoundingBox(int(cols[0]), int(rows[0]), int(cols[-1]), int(rows[-1]))


def axis_anchors(start: int, stop: int, side: int, stride: int) -> Tuple[List[int], Optional[int]]:
    """Strided anchors along one axis of [start, stop] (inclusive) plus the flush closer.

    The first anchor is always kept. Further anchors follow every ``stride``
    pixels while the patch stays inside the range. When the last strided
    patch stops short of ``stop``, a flush anchor ``stop - side + 1`` is added.
    """
    anchors = [start]
    anchor = start + stride
    while anchor + side <= stop + 1:
        anchors.append(anchor)
        anchor += stride
    flush = stop + 1 - side if anchors[-1] + side < stop + 1 else None
    return anchors, flush


def grid_anchors(mask: BinaryMask, params: GridParams) -> List[Anchor]:
    """All candidate grid cells of a mask in row-major order."""
    bbox = stone_bbox(mask)
    if bbox is None:
        return []

    xs, flush_x = axis_anchors(bbox.x0, bbox.x1, params.patch_side, params.stride)
    ys, flush_y = axis_anchors(bbox.y0, bbox.y1, params.patch_side, params.stride)
    columns = [(x, False) for x in xs] + ([(flush_x, True)] if flush_x is not None else [])
    rows = [(y, False) for y in ys] + ([(flush_y, True)] if flush_y is not None else [])
    return [Anchor(x, y, fx, fy) for y, fy in rows for x, fx in columns]


def crop_padded(array: np.ndarray, x: int, y: int, side: int) -> np.ndarray:
    """Square crop at (x, y); pixels outside the source read as zero (False for masks)."""
    height, width = array.shape[:2]
    out = np.zeros((side, side) + array.shape[2:], dtype=array.dtype)
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + side, width), min(y + side, height)
    if x1 > x0 and y1 > y0:
        out[y0 - y : y1 - y, x0 - x : x1 - x] = array[y0:y1, x0:x1]
    return out


def detect_instrument(patch: RgbImage) -> float:
    """Fraction of blue-dominant pixels (B > R and B > G).

    Endoscopy instruments and guide wires show up blue, while stones and tissue
    stay in the red-yellow range, so the blue channel separates them.
    """
    pixels = np.asarray(patch)
    red, green, blue = pixels[..., 0], pixels[..., 1], pixels[..., 2]
    blue_dominant = (blue > red) & (blue > green)
    return float(blue_dominant.mean())


def non_stone_fraction(mask_patch: BinaryMask) -> float:
    """Fraction of pixels of a mask crop that are not stone."""
    return 1.0 - float(np.count_nonzero(mask_patch)) / mask_patch.size


def is_acceptable(pixels: RgbImage, mask_patch: BinaryMask, params: GridParams) -> bool:
    """Rejection tests shared by grid extraction and off-grid over-sampling."""
    if non_stone_fraction(mask_patch) > params.max_non_stone_fraction:
        return False
    return detect_instrument(pixels) <= params.max_non_stone_fraction


def extract_patch_grid(
    image: RgbImage, mask: BinaryMask, params: GridParams, entry: ManifestEntry
) -> List[PatchRecord]:
    """Extract the accepted grid patches of one image.

    The grid starts at the stone bounding-box minimum with stride
    ``patch_side - max_overlap``; flush cells close it at the maximum. Cells
    with too many non-stone or blue-dominant pixels are dropped.
    """
    if image.shape[:2] != mask.shape:
        raise ValueError(f"Image {image.shape[:2]} and mask {mask.shape} dimensions differ")

    records = []
    anchors = grid_anchors(mask, params)
    for anchor in anchors:
        mask_patch = crop_padded(mask, anchor.x, anchor.y, params.patch_side)
        pixels = crop_padded(image, anchor.x, anchor.y, params.patch_side)
        if not is_acceptable(pixels, mask_patch, params):
            continue
        records.append(PatchRecord(pixels, (anchor.x, anchor.y), entry.label, entry.view, entry.stone_id))

    if anchors and not records:
        logger.warning(f"No acceptable {params.patch_side}px patch in stone {entry.stone_id} ({entry.view.value})")
    else:
        logger.debug(f"Stone {entry.stone_id} ({entry.view.value}): kept {len(records)} of {len(anchors)} grid cells")
    return records
