"""Patch extraction, class balancing and augmentation."""

from app.patching.augment import AUGMENTATIONS, augment, augment_pixels, whiten
from app.patching.balance import BalanceTarget, ImageStore, OversamplingError, balance
from app.patching.grid import detect_instrument, extract_patch_grid, grid_anchors, stone_bbox

__all__ = [
    "AUGMENTATIONS",
    "BalanceTarget",
    "ImageStore",
    "OversamplingError",
    "augment",
    "augment_pixels",
    "balance",
    "detect_instrument",
    "extract_patch_grid",
    "grid_anchors",
    "stone_bbox",
    "whiten",
]
