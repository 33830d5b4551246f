"""Configuration management for stonetype."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import yaml


class BaseConfig(ABC):
    """Base class for the YAML-backed configuration files (presets, recipes).

    Subclasses name their file, describe it for error messages and implement
    ``validate``. Without an explicit ``config_dir`` the file location comes
    from the main configuration via ``locate``.
    """

    description = "configuration"
    sort_keys = True

    def __init__(
        self,
        config_dir: Optional[Path] = None,
        file_name: str = "",
        locate: Optional[Callable[[], Path]] = None,
    ):
        if config_dir is None and locate is not None:
            located = locate()
            config_dir, file_name = located.parent, located.name
        self.config_dir = Path(config_dir) if config_dir is not None else Path("configs")
        self._file_name = file_name

    @property
    def config_file(self) -> Path:
        """Return the path to the configuration file."""
        return self.config_dir / self._file_name

    def load(self) -> Dict[str, Any]:
        """Load the configuration from disk.

        Raises:
            FileNotFoundError: If the file does not exist or is empty.
        """
        try:
            with open(self.config_file, "r") as f:
                data = yaml.safe_load(f)
        except FileNotFoundError:
            raise FileNotFoundError(f"{self.description.capitalize()} not found at {self.config_file}")
        if data is None:
            raise FileNotFoundError(f"{self.description.capitalize()} file {self.config_file} is empty")
        return data

    def save(self, config: Dict[str, Any]) -> None:
        """Save the configuration to disk."""
        self.config_file.parent.mkdir(parents=True, exist_ok=True)
        with open(self.config_file, "w") as f:
            yaml.safe_dump(config, f, default_flow_style=False, sort_keys=self.sort_keys)

    @abstractmethod
    def validate(self, config: Dict[str, Any]) -> List[str]:
        """Problems with the configuration, empty when it is valid."""
        pass

    def load_validated(self) -> Dict[str, Any]:
        """Load and validate in one step.

        Raises:
            ValueError: Listing every validation problem.
        """
        config = self.load()
        errors = self.validate(config)
        if errors:
            raise ValueError(f"Invalid {self.description}: " + "; ".join(errors))
        return config
