"""Configuration, execution and reporting of experiments."""

from .config import EXPERIMENT_KINDS, ExperimentConfig, load_config, parse_config
from .runner import ReportRecord, RunResult, run

__all__ = [
    "EXPERIMENT_KINDS",
    "ExperimentConfig",
    "ReportRecord",
    "RunResult",
    "load_config",
    "parse_config",
    "run",
]
