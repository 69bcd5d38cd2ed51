"""User configuration management for the UIC codec."""

import json
import logging
from pathlib import Path
from typing import Any

from src.config import DEFAULT_BITS, DEFAULT_WORKERS
from src.exceptions import StorageError

logger = logging.getLogger(__name__)

# Default configuration values
DEFAULT_CONFIG_DIR = Path.home() / ".config" / "uic-codec"
DEFAULT_CONFIG_FILE = DEFAULT_CONFIG_DIR / "config.json"
DEFAULT_SHRINK = "soft"
DEFAULT_OUTPUT_DIR = Path("results")


class ConfigManager:
    """
    Manages user configuration for the UIC codec.

    Values come from a JSON file with nested sections, for example
    ``{"codec": {"bits": 10}, "experiment": {"workers": 4}}``. A missing
    file means defaults; it is only created once something is set.
    """

    def __init__(self, config_file: Path | None = None):
        """
        Initialize configuration manager.

        Args:
            config_file: Path to configuration file. If None, uses default location.
        """
        self.config_file = config_file or DEFAULT_CONFIG_FILE
        self._config: dict[str, Any] = {}
        self._load_config()

    def _load_config(self) -> None:
        """Load configuration from file if present."""
        if not self.config_file.exists():
            logger.info("No configuration file found, using defaults")
            self._config = {}
            return

        try:
            with open(self.config_file, "r") as f:
                loaded = json.load(f)
            if not isinstance(loaded, dict):
                raise ValueError("top level is not an object")
            self._config = loaded
            logger.info(f"Loaded configuration from {self.config_file}")
        except (ValueError, OSError) as e:
            logger.warning(f"Failed to load config from {self.config_file}: {e}. Using defaults.")
            self._config = {}

    def _save_config(self) -> None:
        """Save current configuration to file."""
        try:
            self.config_file.parent.mkdir(parents=True, exist_ok=True)
            with open(self.config_file, "w") as f:
                json.dump(self._config, f, indent=2)
            logger.info(f"Saved configuration to {self.config_file}")
        except OSError as e:
            raise StorageError(f"Failed to save configuration: {e}") from e

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get configuration value.

        Args:
            key: Configuration key (supports nested keys with dot notation,
                e.g., "codec.bits")
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        value: Any = self._config
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def set(self, key: str, value: Any) -> None:
        """
        Set configuration value and persist it.

        Args:
            key: Configuration key (supports nested keys with dot notation)
            value: Value to set
        """
        keys = key.split(".")
        config = self._config
        for k in keys[:-1]:
            if not isinstance(config.get(k), dict):
                config[k] = {}
            config = config[k]
        config[keys[-1]] = value
        self._save_config()

    def get_bits(self) -> int:
        """Coefficient bit budget."""
        return int(self.get("codec.bits", DEFAULT_BITS))

    def get_shrink(self) -> str:
        """Shrinkage mode name (soft, hard or none)."""
        return str(self.get("codec.shrink", DEFAULT_SHRINK))

    def get_workers(self) -> int:
        """Number of techniques an experiment runs concurrently."""
        return max(1, int(self.get("experiment.workers", DEFAULT_WORKERS)))

    def get_output_dir(self) -> Path:
        """Default directory for experiment results."""
        return Path(self.get("experiment.output_dir", str(DEFAULT_OUTPUT_DIR)))

    def set_bits(self, bits: int) -> None:
        """Set the coefficient bit budget."""
        self.set("codec.bits", bits)

    def set_shrink(self, mode: str) -> None:
        """Set the shrinkage mode name."""
        self.set("codec.shrink", mode)

    def set_workers(self, count: int) -> None:
        """Set the number of concurrent experiment workers."""
        self.set("experiment.workers", count)

    def set_output_dir(self, path: Path | str) -> None:
        """Set the default experiment output directory."""
        self.set("experiment.output_dir", str(Path(path)))

    def reset_to_defaults(self) -> None:
        """Reset all configuration to default values."""
        self._config = {}
        self._save_config()
        logger.info("Configuration reset to defaults")
