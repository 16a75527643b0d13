"""Closed-loop simulation and cost accounting."""

from .controller import LocalController, build_controllers, step_observers
from .costs import (
    DEFAULT_S_VALUES,
    CostReport,
    compute_costs,
    consensus_step,
    convergence_metrics,
    decay_rate,
    default_threshold,
    stage_weight,
    transient_constant,
    truncation_bound,
)
from .run import initial_estimates, run_centralized, run_distributed
from .trace import SimulationTrace

__all__ = [
    "DEFAULT_S_VALUES",
    "CostReport",
    "LocalController",
    "SimulationTrace",
    "build_controllers",
    "compute_costs",
    "consensus_step",
    "convergence_metrics",
    "decay_rate",
    "default_threshold",
    "initial_estimates",
    "run_centralized",
    "run_distributed",
    "stage_weight",
    "step_observers",
    "transient_constant",
    "truncation_bound",
]
