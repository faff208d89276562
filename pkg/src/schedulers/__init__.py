"""Baseline and benchmark schedulers."""
from .baseline import (
    DEFAULT_ICI_GRID_DBM,
    BaselineDecision,
    BaselineVariant,
    decision_rates,
    estimate_sinr,
    round_robin_assign,
    run_baseline,
    sweep_compensation,
    wasted_frames,
)
from .benchmark import (
    BenchmarkSolution,
    SolverParams,
    TransformedProblem,
    build_transformed,
    discretize_solution,
    solve_local,
)

__all__ = [
    "DEFAULT_ICI_GRID_DBM",
    "BaselineDecision",
    "BaselineVariant",
    "decision_rates",
    "estimate_sinr",
    "round_robin_assign",
    "run_baseline",
    "sweep_compensation",
    "wasted_frames",
    "BenchmarkSolution",
    "SolverParams",
    "TransformedProblem",
    "build_transformed",
    "discretize_solution",
    "solve_local",
]
