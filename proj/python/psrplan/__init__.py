"""Online spectral PSR learning with Monte-Carlo tree search planning."""

from ._psrplan import (
    ConfigError,
    Environment,
    Learner,
    Model,
    SnapshotError,
    default_config,
    rocksample_state_count,
    run,
    run_records,
    tiger_prediction_error,
    validate_config,
)

__all__ = [
    "ConfigError",
    "Environment",
    "Learner",
    "Model",
    "SnapshotError",
    "default_config",
    "rocksample_state_count",
    "run",
    "run_records",
    "tiger_prediction_error",
    "validate_config",
]
