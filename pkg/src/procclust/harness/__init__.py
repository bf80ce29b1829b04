from .config import ConfigError, DataError, ExperimentConfig, load_config, parse_config
from .io import load_labels, load_series, save_series
from .sweep import cluster_files, run_sweep, theory_report

__all__ = [
    "ConfigError",
    "DataError",
    "ExperimentConfig",
    "cluster_files",
    "load_config",
    "load_labels",
    "load_series",
    "parse_config",
    "run_sweep",
    "save_series",
    "theory_report",
]
