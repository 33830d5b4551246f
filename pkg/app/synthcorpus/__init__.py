"""Synthetic four-class stone corpus and its nearest-centroid oracle."""

from app.synthcorpus.generator import (
    DEFAULT_IMAGE_SIZE,
    DEFAULT_IMAGES_PER_CLASS_PER_VIEW,
    MANIFEST_FILE,
    generate_corpus,
    render_image,
    stone_id_for,
)
from app.synthcorpus.oracle import nearest_centroid_oracle, nearest_centroid_predictions

__all__ = [
    "DEFAULT_IMAGES_PER_CLASS_PER_VIEW",
    "DEFAULT_IMAGE_SIZE",
    "MANIFEST_FILE",
    "generate_corpus",
    "nearest_centroid_oracle",
    "nearest_centroid_predictions",
    "render_image",
    "stone_id_for",
]
