"""Configuration loader for the main stonetype configuration."""

import os
import shutil
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from app.logging_config import get_logger

logger = get_logger(__name__)

CONFIG_FILE_ENV = "STONETYPE_CONFIG_FILE"
OUTPUT_ROOT_ENV = "STONETYPE_OUTPUT_ROOT"

BUNDLED_CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
BUNDLED_MAIN_CONFIG = BUNDLED_CONFIG_DIR / "stonetype.yml"


def _env_path(name: str) -> Optional[Path]:
    raw = os.environ.get(name, "").strip()
    return Path(raw).expanduser() if raw else None


class ConfigLoader:
    """Load and manage the main stonetype.yml configuration.

    Without an explicit path the file named by STONETYPE_CONFIG_FILE is used,
    falling back to the bundled configs/stonetype.yml. An override path that
    does not exist yet is seeded with a copy of the bundled file.
    """

    def __init__(self, config_path: Optional[Path] = None):
        self.config_path = config_path or _env_path(CONFIG_FILE_ENV) or BUNDLED_MAIN_CONFIG
        self._config_cache: Optional[Dict[str, Any]] = None

    def _seed_override(self) -> None:
        override = _env_path(CONFIG_FILE_ENV)
        if override is None or override.exists():
            return
        if override.resolve() != Path(self.config_path).expanduser().resolve():
            return
        if not BUNDLED_MAIN_CONFIG.is_file():
            return
        override.parent.mkdir(parents=True, exist_ok=True)
        shutil.copy2(BUNDLED_MAIN_CONFIG, override)
        logger.info(f"Seeded {override} from the bundled configuration")

    def load_config(self) -> Dict[str, Any]:
        """Load the main configuration file; a missing or unreadable file yields the defaults."""
        if self._config_cache is not None:
            return self._config_cache
        self._seed_override()
        path = Path(self.config_path).expanduser()
        data: Any = {}
        if path.is_file():
            try:
                data = yaml.safe_load(path.read_text()) or {}
            except (OSError, yaml.YAMLError) as e:
                logger.warning(f"Ignoring unreadable configuration {path}: {e}")
                data = {}
        self._config_cache = data if isinstance(data, dict) else {}
        return self._config_cache

    def _section(self, name: str) -> Dict[str, Any]:
        section = self.load_config().get(name)
        return section if isinstance(section, dict) else {}

    def _located(self, key: str, default_name: str) -> Path:
        """A configured file, relative paths taken against the config file's directory."""
        value = self._section("file_locations").get(key)
        if not value:
            return BUNDLED_CONFIG_DIR / default_name
        path = Path(value).expanduser()
        if path.is_absolute():
            return path
        return Path(self.config_path).expanduser().resolve().parent / path

    def get_output_root(self) -> Path:
        """Default output root for stage artifacts.

        STONETYPE_OUTPUT_ROOT overrides the configured value; it is the only
        setting that can be changed through the environment.
        """
        return _env_path(OUTPUT_ROOT_ENV) or Path(self._section("file_locations").get("output_root", "runs"))

    def get_presets_file(self) -> Path:
        return self._located("presets", "presets.yml")

    def get_recipes_file(self) -> Path:
        return self._located("recipes", "recipes.yml")

    def get_default_seed(self) -> int:
        """Master seed used when a stage is run without --seed."""
        return int(self._section("run").get("seed", 0))

    def get_default_workers(self) -> int:
        return int(self._section("run").get("workers", 1))

    def get_default_preset(self) -> str:
        """Preset name used when --preset is omitted."""
        return str(self._section("run").get("preset", "desk"))

    def reload_config(self) -> None:
        self._config_cache = None


config_loader = ConfigLoader()
