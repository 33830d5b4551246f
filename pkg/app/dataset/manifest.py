"""Corpus manifest reading and writing.

A manifest is a UTF-8 text file with one record per line and five
tab-separated fields::

    image<TAB>mask<TAB>class<TAB>view<TAB>stone_id

Lines starting with ``#`` are comments. Class and view tokens are read
case-insensitively and always written in canonical uppercase.
"""

from pathlib import Path
from typing import List

from app.dataset import ClassLabel, CorpusManifest, ManifestEntry, ViewKind
from app.logging_config import get_logger

logger = get_logger(__name__)

MANIFEST_HEADER = "# image\tmask\tclass\tview\tstone_id"
FIELD_COUNT = 5


class ManifestError(ValueError):
    """A manifest record could not be parsed."""

    def __init__(self, path: Path, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


def _parse_record(path: Path, line_number: int, line: str) -> ManifestEntry:
    fields = line.split("\t")
    if len(fields) != FIELD_COUNT:
        raise ManifestError(path, line_number, f"expected {FIELD_COUNT} tab-separated fields, got {len(fields)}")

    image, mask, class_token, view_token, stone_id = (f.strip() for f in fields)
    if not image or not mask:
        raise ManifestError(path, line_number, "image and mask paths must not be empty")
    if not stone_id:
        raise ManifestError(path, line_number, "stone_id must not be empty")

    try:
        label = ClassLabel.parse(class_token)
        view = ViewKind.parse(view_token)
    except ValueError as e:
        raise ManifestError(path, line_number, str(e))

    return ManifestEntry(Path(image), Path(mask), label, view, stone_id)


def load_manifest(path: Path) -> CorpusManifest:
    """Load and validate a corpus manifest.

    Raises:
        FileNotFoundError: If the manifest does not exist.
        ManifestError: If a record is malformed or names an unknown class/view.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Manifest not found at {path}")

    entries: List[ManifestEntry] = []
    with open(path, "r", encoding="utf-8") as f:
        for line_number, raw in enumerate(f, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            entries.append(_parse_record(path, line_number, line))

    if not entries:
        logger.warning(f"Manifest {path} contains no entries")
    else:
        logger.debug(f"Loaded {len(entries)} manifest entries from {path}")

    return CorpusManifest(tuple(entries), path.resolve().parent)


def format_manifest(manifest: CorpusManifest) -> str:
    """Render a manifest in canonical form."""
    lines = [MANIFEST_HEADER]
    for entry in manifest.entries:
        lines.append(
            "\t".join(
                [
                    entry.image_path.as_posix(),
                    entry.mask_path.as_posix(),
                    entry.label.value,
                    entry.view.value,
                    entry.stone_id,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def save_manifest(manifest: CorpusManifest, path: Path) -> Path:
    """Write a manifest in canonical form. Entry paths are written exactly as stored.

    Args:
        manifest: Manifest to write
        path: Destination file

    Returns:
        The path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(format_manifest(manifest))
    return path
