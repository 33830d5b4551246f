"""Artifact metadata sidecars.

Every stage artifact ``X`` gets a ``X.meta.yml`` next to it holding the stage
name, the tool version, the full run configuration, the seed and sha256
digests of every input. The sidecar is enough to reproduce the artifact.
"""

import hashlib
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

import yaml

from app import __version__

SIDECAR_SUFFIX = ".meta.yml"
_CHUNK = 1 << 20


def sidecar_path(artifact: Path) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + SIDECAR_SUFFIX)


def file_digest(path: Path) -> str:
    """sha256 of a file; for a directory, of its sorted relative paths and file digests."""
    path = Path(path)
    digest = hashlib.sha256()
    if path.is_dir():
        for child in sorted(p for p in path.rglob("*") if p.is_file() and not p.name.endswith(SIDECAR_SUFFIX)):
            digest.update(child.relative_to(path).as_posix().encode("utf-8"))
            digest.update(file_digest(child).encode("ascii"))
        return digest.hexdigest()
    with open(path, "rb") as f:
        while chunk := f.read(_CHUNK):
            digest.update(chunk)
    return digest.hexdigest()


def write_sidecar(
    artifact: Path,
    stage: str,
    config: Dict[str, Any],
    seed: int,
    inputs: Optional[Iterable[Path]] = None,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """Write the metadata sidecar of an artifact and return its path."""
    meta: Dict[str, Any] = {
        "stage": stage,
        "tool": {"name": "stonetype", "version": __version__},
        "seed": int(seed),
        "config": config,
        "inputs": {Path(p).as_posix(): file_digest(p) for p in (inputs or [])},
    }
    if extra:
        meta["extra"] = extra

    path = sidecar_path(artifact)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(meta, f, default_flow_style=False, sort_keys=True)
    return path


def read_sidecar(artifact: Path) -> Dict[str, Any]:
    """Read the metadata sidecar of an artifact.

    Raises:
        FileNotFoundError: If the artifact has no sidecar.
    """
    path = sidecar_path(artifact)
    if not path.is_file():
        raise FileNotFoundError(f"Metadata sidecar not found at {path}")
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}
