"""Hyperparameter presets configuration management."""

from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.configs import BaseConfig
from app.configs.params import EnsembleKind, EnsembleParams

PRESET_NAMES = ("paper", "desk")


def _configured_presets_file() -> Path:
    from app.config_loader import config_loader

    return config_loader.get_presets_file()


class PresetsConfig(BaseConfig):
    """Hyperparameter presets for the four ensemble kinds.

    The file maps a preset name to one block per ensemble kind. A block holds
    EnsembleParams fields with an optional nested ``tree`` block.
    """

    description = "hyperparameter presets"

    def __init__(self, config_dir: Path | None = None, file_name: str = "presets.yml"):
        super().__init__(config_dir, file_name, locate=_configured_presets_file)

    def validate(self, config: Dict[str, Any]) -> List[str]:
        """Validate every preset block against the EnsembleParams model."""
        errors = []
        for preset in PRESET_NAMES:
            blocks = config.get(preset)
            if not isinstance(blocks, dict):
                errors.append(f"Preset '{preset}' is missing")
                continue
            for kind in EnsembleKind:
                block = blocks.get(kind.value)
                if not isinstance(block, dict):
                    errors.append(f"Preset '{preset}' has no '{kind.value}' block")
                    continue
                try:
                    EnsembleParams(kind=kind, **block)
                except ValidationError as e:
                    for err in e.errors():
                        location = ".".join(str(part) for part in err["loc"])
                        errors.append(f"Preset '{preset}' {kind.value}.{location}: {err['msg']}")
        return errors

    def ensemble_params(
        self, preset: str, kind: EnsembleKind, seed: int = 0, config: Optional[Dict[str, Any]] = None
    ) -> EnsembleParams:
        """Build the EnsembleParams of one kind from a preset.

        Raises:
            ValueError: If the preset or kind is unknown or the block is invalid.
        """
        config = config if config is not None else self.load()
        if preset not in config or not isinstance(config[preset], dict):
            raise ValueError(f"Unknown preset '{preset}' (expected one of {', '.join(PRESET_NAMES)})")
        kind = EnsembleKind(kind)
        block = dict(config[preset].get(kind.value) or {})
        if not block:
            raise ValueError(f"Preset '{preset}' has no '{kind.value}' block")
        params = EnsembleParams(kind=kind, **block)
        return params.with_seed(seed)
