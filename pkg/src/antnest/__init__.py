"""Ant nesting optimizer with a per-agent reference backend and a vectorized backend."""

from .core import Bounds, RngStream, RunConfig, RunResult, RunState
from .functions import FunctionSpec, cost_amplify, evaluate, evaluate_population, lookup
from .harness import (
    ComparisonReport,
    TrialStats,
    compare,
    emit_results,
    equivalence_check,
    execute_run,
    run_trials,
)
from .scalar import run
from .vector import run_vector

__all__ = [
    "Bounds", "RngStream", "RunConfig", "RunResult", "RunState",
    "FunctionSpec", "cost_amplify", "evaluate", "evaluate_population", "lookup",
    "ComparisonReport", "TrialStats", "compare", "emit_results", "equivalence_check",
    "execute_run", "run_trials", "run", "run_vector",
]
