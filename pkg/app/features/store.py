"""Feature file persistence.

One header line names the block combination and the LBP parameters, then one
record per vector::

    # combo=eH+eS+eV+LBP lbp_window=5 lbp_neighbors=8 lbp_mapping=riu2
    WW<TAB>SURFACE<TAB>WW-000<TAB>0.25,0.5,...

Components are written with nine significant digits.
"""

import os
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from app.configs.params import FeatureView, LbpParams, canonical_combo
from app.dataset import ClassLabel
from app.features.vectors import FeatureVector
from app.logging_config import get_logger

logger = get_logger(__name__)

HEADER_PREFIX = "# "


class FeatureFileError(ValueError):
    """The feature file is malformed."""


@dataclass(frozen=True)
class FeatureSet:
    """Vectors read from a feature file plus the settings they were computed with."""

    vectors: List[FeatureVector]
    combo: Tuple[str, ...]
    lbp: LbpParams

    @property
    def views(self) -> Tuple[FeatureView, ...]:
        """Views present in the set, in SURFACE, SECTION, MIXED order."""
        present = {v.view for v in self.vectors}
        return tuple(view for view in FeatureView if view in present)

    @property
    def view(self) -> FeatureView:
        """The single view of the set.

        Raises:
            ValueError: If the set is empty or holds vectors of several views.
        """
        views = self.views
        if len(views) != 1:
            names = ", ".join(view.value for view in views) or "none"
            raise ValueError(f"Feature set does not hold a single view (found: {names})")
        return views[0]


def format_header(combo: Sequence[str], lbp: LbpParams) -> str:
    return (
        f"{HEADER_PREFIX}combo={'+'.join(canonical_combo(combo))} lbp_window={lbp.window_side} "
        f"lbp_neighbors={lbp.neighbors} lbp_mapping={lbp.mapping}"
    )


def format_record(vector: FeatureVector) -> str:
    values = ",".join(f"{c:.9g}" for c in vector.components)
    return "\t".join([vector.label.value, vector.view.value, vector.stone_id, values])


def save_features(vectors: Sequence[FeatureVector], path: Path, combo: Sequence[str], lbp: LbpParams) -> None:
    """Write vectors to a feature file (atomically replaced)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [format_header(combo, lbp)] + [format_record(v) for v in vectors]
    tmp_path = path.with_name(path.name + ".tmp")
    with open(tmp_path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    os.replace(tmp_path, path)
    logger.info(f"Wrote {len(vectors)} feature vectors to {path}")


def _parse_header(line: str, path: Path) -> Tuple[Tuple[str, ...], LbpParams]:
    if not line.startswith(HEADER_PREFIX):
        raise FeatureFileError(f"{path}: missing feature file header")
    fields = {}
    for token in line[len(HEADER_PREFIX) :].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise FeatureFileError(f"{path}: malformed header token '{token}'")
        fields[key] = value
    try:
        combo = canonical_combo(fields["combo"])
        lbp = LbpParams(window_side=int(fields.get("lbp_window", 5)))
    except (KeyError, ValueError) as e:
        raise FeatureFileError(f"{path}: invalid header ({e})") from e
    return combo, lbp


def load_features(path: Path) -> FeatureSet:
    """Read a feature file.

    Raises:
        FileNotFoundError: If the file does not exist.
        FeatureFileError: On a malformed header or record, or inconsistent vector lengths.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Feature file not found at {path}")

    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise FeatureFileError(f"{path}: empty feature file")
    combo, lbp = _parse_header(lines[0], path)

    vectors = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise FeatureFileError(f"{path}:{number}: expected 4 tab-separated fields, got {len(parts)}")
        label, view, stone_id, values = parts
        try:
            components = np.array([float(v) for v in values.split(",")], dtype=np.float64)
            vectors.append(FeatureVector(components, FeatureView.parse(view), ClassLabel.parse(label), stone_id))
        except ValueError as e:
            raise FeatureFileError(f"{path}:{number}: {e}") from e

    lengths = {len(v) for v in vectors}
    if len(lengths) > 1:
        raise FeatureFileError(f"{path}: vectors differ in length ({sorted(lengths)})")
    if not vectors:
        logger.warning(f"Feature file {path} holds no vectors")
    return FeatureSet(vectors, combo, lbp)
