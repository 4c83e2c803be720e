"""Experiment harness: benchmark problems, step policies, studies and CLI."""

from .config import COMMANDS, ExperimentConfig, parse_theta, write_manifest
from .experiments import (
    RATE_COLUMNS,
    Report,
    run_experiment,
    run_manufactured2d,
    run_random2d,
    run_wave1d,
)
from .problems import PROBLEMS, Problem, get_problem, manufactured2d, random2d, wave1d
from .runners import (
    NORMS,
    SCHEMES,
    ErrorTracker,
    RunResult,
    bootstrap_state,
    is_nonincreasing,
    is_two_phase,
    make_stepper,
    run_adaptive,
    run_fixed,
    run_to_steady_state,
    spatial_study,
    steady_state_detector,
    temporal_study,
)
from .steps import POLICIES, RateRow, observed_rate, rate_table, step_sequence

__all__ = [
    "COMMANDS",
    "ErrorTracker",
    "ExperimentConfig",
    "NORMS",
    "POLICIES",
    "PROBLEMS",
    "Problem",
    "RATE_COLUMNS",
    "RateRow",
    "Report",
    "RunResult",
    "SCHEMES",
    "bootstrap_state",
    "get_problem",
    "is_nonincreasing",
    "is_two_phase",
    "make_stepper",
    "manufactured2d",
    "observed_rate",
    "parse_theta",
    "random2d",
    "rate_table",
    "run_adaptive",
    "run_experiment",
    "run_fixed",
    "run_manufactured2d",
    "run_random2d",
    "run_to_steady_state",
    "run_wave1d",
    "spatial_study",
    "steady_state_detector",
    "step_sequence",
    "temporal_study",
    "wave1d",
    "write_manifest",
]
