"""Handcrafted patch descriptors: HSV gradient energies and rotation-invariant LBP."""

from app.features.color import ChannelKind, HsvPixel, channel_energy, energy_histogram, rgb_to_hsv, rgb_to_hsv_image
from app.features.lbp import lbp_codes, lbp_histogram
from app.features.store import FeatureFileError, FeatureSet, load_features, save_features
from app.features.vectors import (
    MIXED_LENGTH,
    SINGLE_VIEW_LENGTH,
    FeatureVector,
    block_indices,
    feature_matrix,
    feature_vector,
    feature_vectors,
    mixed_vector,
    pair_views,
    select_features,
)

__all__ = [
    "MIXED_LENGTH",
    "SINGLE_VIEW_LENGTH",
    "ChannelKind",
    "FeatureFileError",
    "FeatureSet",
    "FeatureVector",
    "HsvPixel",
    "block_indices",
    "channel_energy",
    "energy_histogram",
    "feature_matrix",
    "feature_vector",
    "feature_vectors",
    "lbp_codes",
    "lbp_histogram",
    "load_features",
    "mixed_vector",
    "pair_views",
    "rgb_to_hsv",
    "rgb_to_hsv_image",
    "save_features",
    "select_features",
]
