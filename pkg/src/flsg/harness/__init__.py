"""Desk-scale federated-learning attack/defense simulation: synthetic
two-class blobs, a trigger backdoor, logistic-regression clients, and the
round loop that measures main and backdoor accuracy with and without the
defense."""

from .experiment import (
    RoundMetrics,
    Scenario,
    bundled_scenario_path,
    metrics_to_csv,
    run_experiment,
    scenario_from_file,
)
from .task import SyntheticTask, default_task
from .training import ClientSim, TrainConfig, train_local

__all__ = [
    "ClientSim",
    "RoundMetrics",
    "Scenario",
    "SyntheticTask",
    "TrainConfig",
    "bundled_scenario_path",
    "default_task",
    "metrics_to_csv",
    "run_experiment",
    "scenario_from_file",
    "train_local",
]
