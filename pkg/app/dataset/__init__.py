"""Corpus data model: stone classes, view kinds, manifests, rasters and patch records."""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Tuple

import numpy as np


class ClassLabel(str, Enum):
    """Kidney-stone class, named by its dominant crystalline species."""

    WW = "WW"
    WD = "WD"
    UA = "UA"
    BRU = "BRU"

    @property
    def code(self) -> str:
        """Morphological type code of the class."""
        return _MORPHOLOGICAL_CODES[self]

    @property
    def position(self) -> int:
        """Position of the class in the canonical class order."""
        return CLASS_ORDER.index(self)

    @classmethod
    def parse(cls, token: str) -> "ClassLabel":
        """Parse a class token, case-insensitive, accepting names and morphological codes."""
        wanted = token.strip().upper()
        for label in cls:
            if wanted == label.value or wanted == label.code.upper():
                return label
        raise ValueError(f"Unknown class token '{token}' (expected one of {', '.join(c.value for c in cls)})")


_MORPHOLOGICAL_CODES = {
    ClassLabel.WW: "Ia",
    ClassLabel.WD: "IIb",
    ClassLabel.UA: "IIIb",
    ClassLabel.BRU: "IVd",
}

CLASS_ORDER: Tuple[ClassLabel, ...] = tuple(ClassLabel)


class ViewKind(str, Enum):
    """Which side of the stone fragment an image shows."""

    SURFACE = "SURFACE"
    SECTION = "SECTION"

    @classmethod
    def parse(cls, token: str) -> "ViewKind":
        """Parse a view token, case-insensitive."""
        wanted = token.strip().upper()
        for view in cls:
            if wanted == view.value:
                return view
        raise ValueError(f"Unknown view token '{token}' (expected SURFACE or SECTION)")


# An RgbImage is an (height, width, 3) uint8 array; a BinaryMask is an
# (height, width) bool array where True marks stone pixels.
RgbImage = np.ndarray
BinaryMask = np.ndarray


def frozen_array(array: np.ndarray) -> np.ndarray:
    """Return a read-only view of an array so records can be shared across workers."""
    view = np.asarray(array).view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True)
class ManifestEntry:
    """One (image, mask) pair of the corpus."""

    image_path: Path
    mask_path: Path
    label: ClassLabel
    view: ViewKind
    stone_id: str


@dataclass(frozen=True)
class CorpusManifest:
    """The list of image/mask pairs that make up a dataset.

    Relative entry paths are resolved against ``root`` (the manifest's directory).
    """

    entries: Tuple[ManifestEntry, ...] = ()
    root: Path = field(default_factory=Path)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ManifestEntry]:
        return iter(self.entries)

    def resolve(self, path: Path) -> Path:
        """Resolve an entry path against the manifest root."""
        return path if path.is_absolute() else self.root / path

    def select(self, view: ViewKind) -> List[ManifestEntry]:
        """Entries of a single view."""
        return [entry for entry in self.entries if entry.view == view]


@dataclass(frozen=True, eq=False)
class PatchRecord:
    """One square image patch plus its provenance."""

    pixels: np.ndarray
    origin: Tuple[int, int]
    label: ClassLabel
    view: ViewKind
    stone_id: str
    synthetic: bool = False

    def __post_init__(self):
        if self.pixels.ndim != 3 or self.pixels.shape[0] != self.pixels.shape[1] or self.pixels.shape[2] != 3:
            raise ValueError(f"Patch must be a square RGB raster, got shape {self.pixels.shape}")
        object.__setattr__(self, "pixels", frozen_array(self.pixels))

    @property
    def side(self) -> int:
        return int(self.pixels.shape[0])

    def with_pixels(self, pixels: np.ndarray, synthetic: bool = True) -> "PatchRecord":
        """Copy of this record carrying other pixels (same provenance)."""
        return PatchRecord(pixels, self.origin, self.label, self.view, self.stone_id, synthetic)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PatchRecord):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.label == other.label
            and self.view == other.view
            and self.stone_id == other.stone_id
            and self.synthetic == other.synthetic
            and np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None


from app.dataset.manifest import ManifestError, load_manifest, save_manifest  # noqa: E402
from app.dataset.patch_store import PatchIndexError, load_patches, save_patches  # noqa: E402
from app.dataset.rasters import load_image_pair, load_mask, load_rgb, save_mask, save_rgb  # noqa: E402

__all__ = [
    "CLASS_ORDER",
    "BinaryMask",
    "ClassLabel",
    "CorpusManifest",
    "ManifestEntry",
    "ManifestError",
    "PatchIndexError",
    "PatchRecord",
    "RgbImage",
    "ViewKind",
    "frozen_array",
    "load_image_pair",
    "load_manifest",
    "load_mask",
    "load_patches",
    "load_rgb",
    "save_manifest",
    "save_mask",
    "save_patches",
    "save_rgb",
]
