"""Configuration management for the benchmark harness."""

import copy
import hashlib
import json
import os
from pathlib import Path

import yaml
from dotenv import load_dotenv

# Keys that move artifacts without changing what is computed
LOCATION_KEYS = (("experiment", "out_dir"),)


def _merge(base, overrides):
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


class Config:
    """Configuration loader for different environments."""

    def __init__(self, environment="dev"):
        self.environment = environment
        self.config_dir = Path(__file__).parent
        self.project_root = self.config_dir.parent
        self.config = self._load_config()

    def _load_config(self):
        """Load configuration from YAML file."""
        config_file = self.config_dir / "environments" / f"{self.environment}.yaml"

        if not config_file.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_file}")

        with open(config_file, "r") as f:
            return yaml.safe_load(f) or {}

    def get(self, key, default=None):
        """Get configuration value by dot notation key."""
        keys = key.split(".")
        value = self.config

        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default

        return value

    def set(self, key, value):
        """Set a dotted key, creating intermediate sections."""
        *sections, last = key.split(".")
        node = self.config
        for section in sections:
            node = node.setdefault(section, {})
        node[last] = value

    def merge(self, overrides):
        """Deep-merge an experiment config (nested dict) over the YAML values."""
        _merge(self.config, copy.deepcopy(overrides))
        return self

    def load_experiment(self, path):
        """Merge a JSON experiment file over the YAML values."""
        with open(path, "r", encoding="utf-8") as f:
            return self.merge(json.load(f))

    def fixture_path(self, relative):
        """Absolute path of a fixture file named relative to the project root."""
        path = Path(relative)
        return path if path.is_absolute() else self.project_root / path

    def digest(self):
        """Stable hash of the effective configuration, leaving out where artifacts go."""
        settings = copy.deepcopy(self.config)
        for section, key in LOCATION_KEYS:
            settings.get(section, {}).pop(key, None)
        text = json.dumps(settings, sort_keys=True, default=str)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


# Global config instance
_config = None


def get_config(environment=None):
    """Get or create global configuration instance."""
    global _config

    if environment is None:
        load_dotenv()
        environment = os.getenv("WARPP_ENV", "dev")

    if _config is None or _config.environment != environment:
        _config = Config(environment)

    return _config
