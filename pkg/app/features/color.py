"""HSV conversion and per-channel gradient energy histograms."""

import math
from enum import Enum
from typing import NamedTuple, Sequence

import matplotlib.colors
import numpy as np

from app.configs.params import BLOCK_BINS


class HsvPixel(NamedTuple):
    """Hue in degrees [0, 360), saturation in [0, 1], value on the input channel scale."""

    h: float
    s: float
    v: float


class ChannelKind(str, Enum):
    H = "H"
    S = "S"
    V = "V"

    @property
    def channel_max(self) -> float:
        return {ChannelKind.H: 360.0, ChannelKind.S: 1.0, ChannelKind.V: 255.0}[self]

    @property
    def energy_max(self) -> float:
        """Largest central-difference magnitude on this channel's scale."""
        return 2.0 * math.sqrt(2.0) * self.channel_max


def rgb_to_hsv_image(rgb: np.ndarray) -> np.ndarray:
    """Convert an (..., 3) 8-bit RGB array to HSV with H in degrees, S in [0, 1], V = max(R, G, B).

    Achromatic pixels (R = G = B) get H = 0 and S = 0.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    hsv = matplotlib.colors.rgb_to_hsv(rgb / 255.0)
    hue = hsv[..., 0] * 360.0
    # a hue just below 1.0 can round up to a full turn
    hue[hue >= 360.0] = 0.0
    return np.stack([hue, hsv[..., 1], rgb.max(axis=-1)], axis=-1)


def rgb_to_hsv(pixel: Sequence[float]) -> HsvPixel:
    """HSV of a single RGB triple."""
    h, s, v = rgb_to_hsv_image(np.asarray(pixel, dtype=np.float64).reshape(1, 3))[0]
    return HsvPixel(float(h), float(s), float(v))


def channel_energy(channel: np.ndarray) -> np.ndarray:
    """Gradient energy sqrt(gx^2 + gy^2) from central differences, on interior pixels only.

    Raises:
        ValueError: If the raster is smaller than 3x3.
    """
    data = np.asarray(channel, dtype=np.float64)
    if data.ndim != 2 or min(data.shape) < 3:
        raise ValueError(f"Energy needs a 2-D raster of side >= 3, got shape {data.shape}")
    gx = data[1:-1, 2:] - data[1:-1, :-2]
    gy = data[2:, 1:-1] - data[:-2, 1:-1]
    return np.sqrt(gx * gx + gy * gy)


def energy_histogram(energy: np.ndarray, channel_kind: ChannelKind) -> np.ndarray:
    """Ten equal-width bins over [0, E_max] of the channel, normalized to sum 1.

    Energies at or above E_max fall into the last bin.

    Raises:
        ValueError: If the energy map is empty.
    """
    energy = np.asarray(energy, dtype=np.float64)
    if energy.size == 0:
        raise ValueError("Cannot histogram an empty energy map")
    e_max = ChannelKind(channel_kind).energy_max
    counts, _ = np.histogram(np.clip(energy, 0.0, e_max), bins=BLOCK_BINS, range=(0.0, e_max))
    return counts / counts.sum()
