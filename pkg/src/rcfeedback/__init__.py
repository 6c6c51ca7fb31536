"""Reservoir computers with output feedback: simulation tiers, tasks, training and metrics."""

from .experiment import ExperimentSpec, ReservoirSpec, RunReport, Seeds, TaskSpec, run_experiment
from .fidelity import FidelityConfig, Tier
from .reservoir import ReservoirConfig, ReservoirState, StateTrajectory, drive, generate_mask, reservoir_step
from .series import TimeSeries, Timestep
from .training import ReadoutWeights, autonomous_run, mse, readout, ridge_train

__version__ = "0.1.0"

__all__ = [
    "ExperimentSpec",
    "FidelityConfig",
    "ReadoutWeights",
    "ReservoirConfig",
    "ReservoirSpec",
    "ReservoirState",
    "RunReport",
    "Seeds",
    "StateTrajectory",
    "TaskSpec",
    "Tier",
    "TimeSeries",
    "Timestep",
    "autonomous_run",
    "drive",
    "generate_mask",
    "mse",
    "readout",
    "reservoir_step",
    "ridge_train",
    "run_experiment",
]
