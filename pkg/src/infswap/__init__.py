"""Infinite-swapping style importance sampling for rare events."""
from importlib.metadata import PackageNotFoundError, version as _version

from .estimator import (
    SimulationReport,
    SimulationResult,
    enumerate_expectation,
    ins_trial_indicator,
    ins_trial_risk,
    mc_trial,
    run_simulation,
    summarize,
)
from .rng import Substream, derive_substream
from .theory import DecayRateResult, optimal_alpha, rate_bound, v_probability, v_risk
from .weights import (
    TemperatureSchedule,
    first_slot_weights,
    permutation_weights,
    two_temperature_weight,
    weights_from_log_densities,
)

try:
    __version__ = _version("artifact")
except PackageNotFoundError:  # pragma: no cover - source checkout without install
    __version__ = "0.0.0"

__all__ = [
    "DecayRateResult",
    "SimulationReport",
    "SimulationResult",
    "Substream",
    "TemperatureSchedule",
    "derive_substream",
    "enumerate_expectation",
    "first_slot_weights",
    "ins_trial_indicator",
    "ins_trial_risk",
    "mc_trial",
    "optimal_alpha",
    "permutation_weights",
    "rate_bound",
    "run_simulation",
    "summarize",
    "two_temperature_weight",
    "v_probability",
    "v_risk",
    "weights_from_log_densities",
]
