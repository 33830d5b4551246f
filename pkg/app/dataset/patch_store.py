"""Patch directory persistence.

Layout under a patch directory::

    index.tsv
    patches/<class>/<view>/<stone_id>_<n>.png

The index holds one provenance record per patch. Rasters are lossless PNG so
patches are never re-compressed between pipeline stages.
"""

import os
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

from app.dataset import ClassLabel, PatchRecord, ViewKind
from app.dataset.rasters import load_rgb, save_rgb
from app.logging_config import get_logger

logger = get_logger(__name__)

INDEX_FILE = "index.tsv"
INDEX_HEADER = "# file\tclass\tview\tstone_id\tx\ty\tside\tsynthetic"
INDEX_FIELDS = 8


class PatchIndexError(ValueError):
    """The patch index is corrupt or references a missing raster."""


def patch_file_name(record: PatchRecord, n: int) -> Path:
    """Relative path of the n-th patch of a stone."""
    return Path("patches") / record.label.value / record.view.value / f"{record.stone_id}_{n}.png"


def save_patches(records: Iterable[PatchRecord], directory: Path) -> int:
    """Write patches and their index to a directory.

    The index is written last through a temporary file, so a concurrent reader
    never sees a half-written index. Only one writer may target a directory.

    Returns:
        Number of patches written
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    counters: Dict[Tuple[ClassLabel, ViewKind, str], int] = defaultdict(int)
    lines = [INDEX_HEADER]
    count = 0
    for record in records:
        key = (record.label, record.view, record.stone_id)
        relative = patch_file_name(record, counters[key])
        counters[key] += 1

        save_rgb(record.pixels, directory / relative)
        x, y = record.origin
        lines.append(
            "\t".join(
                [
                    relative.as_posix(),
                    record.label.value,
                    record.view.value,
                    record.stone_id,
                    str(x),
                    str(y),
                    str(record.side),
                    "1" if record.synthetic else "0",
                ]
            )
        )
        count += 1

    index_path = directory / INDEX_FILE
    tmp_path = index_path.with_suffix(".tsv.tmp")
    with open(tmp_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    os.replace(tmp_path, index_path)

    logger.info(f"Wrote {count} patches to {directory}")
    return count


def _parse_index_line(index_path: Path, line_number: int, line: str) -> Tuple[Path, ClassLabel, ViewKind, str, int, int, int, bool]:
    fields = line.split("\t")
    if len(fields) != INDEX_FIELDS:
        raise PatchIndexError(f"{index_path}:{line_number}: expected {INDEX_FIELDS} fields, got {len(fields)}")
    try:
        relative, class_token, view_token, stone_id, x, y, side, synthetic = fields
        if synthetic not in ("0", "1"):
            raise ValueError(f"synthetic flag must be 0 or 1, got '{synthetic}'")
        return (
            Path(relative),
            ClassLabel.parse(class_token),
            ViewKind.parse(view_token),
            stone_id,
            int(x),
            int(y),
            int(side),
            synthetic == "1",
        )
    except ValueError as e:
        raise PatchIndexError(f"{index_path}:{line_number}: {e}")


def load_patches(directory: Path) -> List[PatchRecord]:
    """Load every patch listed in a directory's index.

    Raises:
        FileNotFoundError: If the directory has no index.
        PatchIndexError: If the index is corrupt, names a missing raster, or a raster
            disagrees with its recorded side length.
    """
    directory = Path(directory)
    index_path = directory / INDEX_FILE
    if not index_path.is_file():
        raise FileNotFoundError(f"Patch index not found at {index_path}")

    records: List[PatchRecord] = []
    with open(index_path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            relative, label, view, stone_id, x, y, side, synthetic = _parse_index_line(index_path, line_number, line)

            patch_path = directory / relative
            if not patch_path.is_file():
                raise PatchIndexError(f"{index_path}:{line_number}: patch file missing: {relative.as_posix()}")
            pixels = load_rgb(patch_path)
            if pixels.shape[:2] != (side, side):
                raise PatchIndexError(
                    f"{index_path}:{line_number}: {relative.as_posix()} is {pixels.shape[1]}x{pixels.shape[0]}, "
                    f"index says {side}x{side}"
                )
            records.append(PatchRecord(pixels, (x, y), label, view, stone_id, synthetic))

    logger.debug(f"Loaded {len(records)} patches from {directory}")
    return records
