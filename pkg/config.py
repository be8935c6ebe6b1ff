"""
Configuration Management for the Wiener-Wintner Lab
===================================================
Handles loading and validation of run settings: worker counts, seeds,
numerical budgets, logging and per-experiment parameter sections.

Precedence for experiment parameters: command-line flag, then the
experiment's section in the config file, then the schema default.
"""

import json
import os
import sys
from typing import Any, Dict, Optional

from progress_tracker import default_workers
from utils import ConfigError, setup_logger


class ConfigManager:
    """Configuration manager with recursive defaults and dot-notation access."""

    def __init__(self, config_file: Optional[str] = None):
        """
        Initialize configuration manager.

        Args:
            config_file: Path to configuration file, defaults to 'config.json'
        """
        self.config_file = config_file or 'config.json'
        self.logger = setup_logger('config')
        self.config = self._load_default_config()

        if os.path.exists(self.config_file):
            self._load_config_file()
        else:
            self.logger.info(f"Config file {self.config_file} not found, using defaults")

    def _load_default_config(self) -> Dict[str, Any]:
        """
        Built-in defaults.

        Returns:
            Dictionary containing default configuration
        """
        return {
            "runtime": {
                "workers": default_workers(),
                "seed": 20240101,
                "fft_chunk": 1 << 22,
                "grid_cap": 1 << 28,
            },
            "logging": {
                "log_level": "WARNING",
                "log_file": None,
            },
            "defaults": {
                "delta": 0.05,
                "rho": 2.0,
                "abs_err": 1e-3,
                "N_per_level": 10 ** 4,
                "H_per_level": 10 ** 2,
            },
            "experiments": {},
        }

    def _load_config_file(self) -> None:
        """Load configuration from file and merge with defaults."""
        try:
            with open(self.config_file, 'r', encoding='utf-8') as f:
                user_config = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Invalid JSON in config file {self.config_file}: {e}") from e
        except OSError as e:
            raise ConfigError(f"Error reading config file {self.config_file}: {e}") from e
        if not isinstance(user_config, dict):
            raise ConfigError(f"Config file {self.config_file} must hold a JSON object")

        self.config = self._merge_configs(self.config, user_config)
        self.logger.info(f"Loaded configuration from {self.config_file}")
        self._validate_runtime_settings()

    def _merge_configs(self, default: Dict[str, Any], user: Dict[str, Any]) -> Dict[str, Any]:
        """
        Recursively merge user configuration with defaults.

        Args:
            default: Default configuration dictionary
            user: User configuration dictionary

        Returns:
            Merged configuration dictionary
        """
        merged = default.copy()

        for key, value in user.items():
            if key in merged and isinstance(merged[key], dict) and isinstance(value, dict):
                merged[key] = self._merge_configs(merged[key], value)
            else:
                merged[key] = value

        return merged

    def _validate_runtime_settings(self) -> None:
        """Log warnings for settings that are legal but unusual."""
        runtime = self.config.get('runtime', {})
        if runtime.get('workers', 1) > (os.cpu_count() or 1):
            self.logger.warning(f"runtime.workers={runtime['workers']} exceeds the CPU count")
        if runtime.get('grid_cap', 0) > 1 << 30:
            self.logger.warning("runtime.grid_cap above 2^30 may exhaust memory")
        delta = self.config.get('defaults', {}).get('delta', 0.05)
        if not 0 < delta <= 0.2:
            self.logger.warning(f"defaults.delta={delta} lies outside (0, 0.2]")

    def validate_runtime_config(self) -> bool:
        """
        Validate the runtime section.

        Returns:
            True if configuration is valid, False otherwise
        """
        runtime = self.config.get('runtime', {})
        for field in ('workers', 'seed', 'fft_chunk', 'grid_cap'):
            if not isinstance(runtime.get(field), int):
                self.logger.error(f"runtime.{field} must be an integer")
                return False
        if runtime['workers'] < 1:
            self.logger.error("runtime.workers must be positive")
            return False
        for field in ('fft_chunk', 'grid_cap'):
            value = runtime[field]
            if value < 2 or value & (value - 1):
                self.logger.error(f"runtime.{field} must be a power of two")
                return False
        return True

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Get configuration value using dot notation.

        Args:
            key_path: Dot-separated path to configuration value (e.g., 'runtime.workers')
            default: Default value if key not found

        Returns:
            Configuration value or default
        """
        keys = key_path.split('.')
        value = self.config

        for key in keys:
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default

        return value

    def get_experiment_config(self, name: str) -> Dict[str, Any]:
        """Parameter section of one experiment (empty when absent)."""
        section = self.get(f'experiments.{name}', {})
        if not isinstance(section, dict):
            raise ConfigError(f"experiments.{name} must be an object", key=f'experiments.{name}')
        return dict(section)

    def print_config_summary(self, stream=None) -> None:
        """Print a summary of current configuration settings to stderr."""
        stream = stream or sys.stderr
        runtime = self.config.get('runtime', {})
        defaults = self.config.get('defaults', {})
        print("\n" + "=" * 60, file=stream)
        print("WIENER-WINTNER LAB CONFIGURATION", file=stream)
        print("=" * 60, file=stream)
        print(f"Config file: {self.config_file}", file=stream)
        print(f"Workers: {runtime.get('workers')}  Seed: {runtime.get('seed')}", file=stream)
        print(f"FFT chunk: {runtime.get('fft_chunk')}  Grid cap: {runtime.get('grid_cap')}", file=stream)
        print(f"Defaults: delta={defaults.get('delta')} rho={defaults.get('rho')} "
              f"abs_err={defaults.get('abs_err')}", file=stream)
        sections = sorted(self.config.get('experiments', {}))
        print(f"Experiment sections: {', '.join(sections) if sections else 'none'}", file=stream)
        print("=" * 60, file=stream)
