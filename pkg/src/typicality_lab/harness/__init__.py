from .config import ResolvedConfig, build_config, load_config_file, validate_config_dict
from .registry import (
    CATALOG_SCHEMA,
    EXPERIMENTS,
    catalog,
    list_experiments,
    run_experiment,
    write_report_artifacts,
)

__all__ = [
    "CATALOG_SCHEMA",
    "EXPERIMENTS",
    "ResolvedConfig",
    "build_config",
    "catalog",
    "list_experiments",
    "load_config_file",
    "run_experiment",
    "validate_config_dict",
    "write_report_artifacts",
]
