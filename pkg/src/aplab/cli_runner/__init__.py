"""Configuration, orchestration and reporting for the `aplab` command."""

from .config import CHECKS, ESTIMATORS, ConfigError, ExperimentConfig, config_from_dict, parse_config
from .emit import CSV_COLUMNS, emit_report, read_json_report
from .main import main
from .runner import RunReport, run_experiment
