"""Neural-adaptive stochastic attitude filtering on SO(3)."""

from .config import ConfigError, ExperimentConfig, parse_config
from .estimator import NeuralAdaptiveAttitudeFilter
from .experiment import (
    MetricsReport,
    RunRecord,
    SweepSpec,
    compute_steady_state_stats,
    emit_csv,
    run_experiment,
    sweep_neurons,
)
from .filter import FeatureMap, FilterParams, FilterState, NumericalFailure, run_filter
from .sim import NoiseSpec, OmegaProfile, SimConfig, generate_run
from .wahba import DegenerateGeometryError, ObservationSet, reconstruct_svd

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DegenerateGeometryError",
    "ExperimentConfig",
    "FeatureMap",
    "FilterParams",
    "FilterState",
    "MetricsReport",
    "NeuralAdaptiveAttitudeFilter",
    "NoiseSpec",
    "NumericalFailure",
    "ObservationSet",
    "OmegaProfile",
    "RunRecord",
    "SimConfig",
    "SweepSpec",
    "compute_steady_state_stats",
    "emit_csv",
    "generate_run",
    "parse_config",
    "reconstruct_svd",
    "run_experiment",
    "run_filter",
    "sweep_neurons",
]
