"""Batch experiments and the command-line interface."""

from .config import ConfigError, ExperimentConfig, config_from_dict, load_config
from .pipeline import run

__all__ = ["ConfigError", "ExperimentConfig", "config_from_dict", "load_config", "run"]
