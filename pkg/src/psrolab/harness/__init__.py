from psrolab.harness.config import KINDS, SCHEMA_ID, ConfigError, ExperimentConfig, load_config
from psrolab.harness.runs import compare_runs, run_experiment

__all__ = [
    "KINDS", "SCHEMA_ID", "ConfigError", "ExperimentConfig", "load_config", "compare_runs", "run_experiment",
]
