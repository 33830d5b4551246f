"""Rotation-invariant uniform local binary patterns (riu2, 8 neighbours)."""

import math
from typing import List

import numpy as np

from app.configs.params import BLOCK_BINS, LbpParams

NON_UNIFORM_CODE = 9


def _shifted(data: np.ndarray, r: int, dy: int, dx: int) -> np.ndarray:
    """Values at offset (dy, dx) from every interior centre pixel."""
    h, w = data.shape
    return data[r + dy : h - r + dy, r + dx : w - r + dx]


def _diagonal(data: np.ndarray, r: int, sy: int, sx: int) -> np.ndarray:
    """Bilinear sample at distance r along a diagonal.

    The expression is symmetric in the two side corners, so a 90 degree
    rotation of the raster reproduces the same floating-point value.
    """
    d = r / math.sqrt(2.0)
    n = int(math.floor(d))
    f = d - n
    ff = f * f
    near = _shifted(data, r, sy * n, sx * n)
    side_x = _shifted(data, r, sy * n, sx * (n + 1))
    side_y = _shifted(data, r, sy * (n + 1), sx * n)
    far = _shifted(data, r, sy * (n + 1), sx * (n + 1))
    return near + (f * (side_x - near) + f * (side_y - near)) + ff * ((near + far) - (side_x + side_y))


def neighbour_samples(data: np.ndarray, r: int) -> List[np.ndarray]:
    """The 8 circle samples of every interior pixel, in circular order starting east."""
    return [
        _shifted(data, r, 0, r),
        _diagonal(data, r, -1, 1),
        _shifted(data, r, -r, 0),
        _diagonal(data, r, -1, -1),
        _shifted(data, r, 0, -r),
        _diagonal(data, r, 1, -1),
        _shifted(data, r, r, 0),
        _diagonal(data, r, 1, 1),
    ]


def lbp_codes(grey: np.ndarray, params: LbpParams) -> np.ndarray:
    """riu2 code (0-9) of every interior pixel.

    A pattern with at most two 0/1 transitions around the circle maps to its
    number of set bits (0-8); every other pattern maps to 9.

    Raises:
        ValueError: If the raster is smaller than the LBP window.
    """
    data = np.asarray(grey, dtype=np.float64)
    if data.ndim != 2 or min(data.shape) < params.window_side:
        raise ValueError(
            f"LBP needs a 2-D raster of side >= {params.window_side} (window side), got shape {data.shape}"
        )
    r = params.radius
    centre = _shifted(data, r, 0, 0)
    bits = np.stack([sample >= centre for sample in neighbour_samples(data, r)])
    transitions = np.count_nonzero(bits != np.roll(bits, 1, axis=0), axis=0)
    ones = np.count_nonzero(bits, axis=0)
    return np.where(transitions <= 2, ones, NON_UNIFORM_CODE)


def lbp_histogram(grey: np.ndarray, params: LbpParams) -> np.ndarray:
    """Normalized 10-bin histogram of the riu2 codes of a grey raster."""
    codes = lbp_codes(grey, params)
    counts = np.bincount(codes.ravel(), minlength=BLOCK_BINS)
    return counts / counts.sum()
