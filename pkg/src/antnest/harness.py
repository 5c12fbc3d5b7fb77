"""Run orchestration, statistics, backend comparison and result emission."""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Iterator, TextIO

import numpy as np

from .core import MASK64, RngStream, RunConfig, RunResult, RunState, TraceEntry
from .functions import FunctionSpec, lookup
from .scalar import init_state, step
from .vector import init_state_vector, step_vector

InitFn = Callable[[RunConfig, RngStream, FunctionSpec], RunState]
StepFn = Callable[[RunState, RunConfig, FunctionSpec, RngStream], RunState]


@dataclass(frozen=True)
class Backend:
    name: str
    init: InitFn
    step: StepFn


BACKENDS: dict[str, Backend] = {
    "scalar": Backend("scalar", init_state, step),
    "vector": Backend("vector", init_state_vector, step_vector),
}


def get_backend(backend: str | Backend) -> Backend:
    if isinstance(backend, Backend):
        return backend
    try:
        return BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}; expected one of {sorted(BACKENDS)}") from None


def iterate_states(config: RunConfig, backend: str | Backend = "vector",
                   stream: RngStream | None = None) -> Iterator[RunState]:
    """Yield the initial state followed by the state after every iteration."""
    be = get_backend(backend)
    spec = lookup(config.function_id, config.dimension)
    stream = stream if stream is not None else RngStream(config.seed)
    state = be.init(config, stream, spec)
    yield state
    for _ in range(config.iterations):
        state = be.step(state, config, spec, stream)
        yield state


def execute_run(config: RunConfig, backend: str | Backend = "vector") -> RunResult:
    be = get_backend(backend)
    spec = lookup(config.function_id, config.dimension)
    stream = RngStream(config.seed)
    trace: list[TraceEntry] = []
    start = time.perf_counter_ns()
    state = be.init(config, stream, spec)
    for _ in range(config.iterations):
        state = be.step(state, config, spec, stream)
        trace.append(TraceEntry(state.iteration, state.best.fitness, state.best.index))
    elapsed = time.perf_counter_ns() - start
    return RunResult(trace, state.best.fitness, elapsed, be.name, config, final_state=state)


# ---------------------------------------------------------------- trials

@dataclass(frozen=True)
class TrialStats:
    function_id: str
    backend: str
    runs: int
    mean_best: float
    std_best: float
    mean_seconds: float


def trial_seeds(base: int, runs: int) -> list[int]:
    return [(base + i) & MASK64 for i in range(runs)]


def _run_one(args: tuple[RunConfig, str]) -> RunResult:
    config, backend = args
    return execute_run(config, backend)


def run_trials(config: RunConfig, backend: str = "vector", runs: int = 30,
               workers: int = 1) -> TrialStats:
    """Independent restarts with seeds ``seed + 0 .. seed + runs - 1``.

    ``std_best`` is the sample standard deviation (n - 1 denominator).
    Results are gathered in seed order whatever ``workers`` is.
    """
    stats, _ = run_trials_detailed(config, backend, runs, workers)
    return stats


def run_trials_detailed(config: RunConfig, backend: str = "vector", runs: int = 30,
                        workers: int = 1) -> tuple[TrialStats, list[RunResult]]:
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    jobs = [(replace(config, seed=s), backend) for s in trial_seeds(config.seed, runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]
    finals = [r.final_best for r in results]
    std = statistics.stdev(finals) if runs > 1 else 0.0
    seconds = statistics.fmean(r.elapsed_ns for r in results) / 1e9
    stats = TrialStats(config.function_id, get_backend(backend).name, runs,
                       statistics.fmean(finals), std, seconds)
    return stats, results


# ---------------------------------------------------------------- equivalence

@dataclass(frozen=True)
class EquivalenceReport:
    passed: bool
    iterations_compared: int
    iteration: int | None = None
    field: str | None = None
    element: tuple[int, ...] | None = None
    left_value: object = None
    right_value: object = None
    left: str = "scalar"
    right: str = "vector"

    def describe(self) -> str:
        if self.passed:
            return (f"PASS {self.left} == {self.right}: bit-identical over "
                    f"{self.iterations_compared} iteration(s)")
        return (f"FAIL {self.left} != {self.right}: first divergence at iteration "
                f"{self.iteration}, field {self.field}, element {self.element} "
                f"({self.left_value!r} vs {self.right_value!r})")


def _bits(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    return a.view(np.uint64) if a.dtype == np.float64 else a


def _first_difference(left: np.ndarray, right: np.ndarray) -> tuple[int, ...] | None:
    if left.shape != right.shape:
        return ()
    diff = _bits(left) != _bits(right)
    if not diff.any():
        return None
    if diff.ndim == 2:
        # agent-major scan so the reported element is the first one drawn
        a, d = np.argwhere(diff.T)[0]
        return (int(d), int(a))
    return tuple(int(i) for i in np.argwhere(diff)[0])


_STATE_FIELDS = ("candidate", "accepted", "population", "previous", "fitness", "previous_fitness")


def _compare_states(ls: RunState, rs: RunState, ldraws: int, rdraws: int):
    for name in _STATE_FIELDS:
        lv, rv = getattr(ls, name), getattr(rs, name)
        if lv is None and rv is None:
            continue
        if lv is None or rv is None:
            return name, (), lv, rv
        where = _first_difference(np.asarray(lv), np.asarray(rv))
        if where is not None:
            if where == ():
                return name, (), np.shape(lv), np.shape(rv)
            return name, where, np.asarray(lv)[where].item(), np.asarray(rv)[where].item()
    if ls.best.index != rs.best.index:
        return "best_index", (), ls.best.index, rs.best.index
    if ldraws != rdraws:
        return "rng_draws", (), ldraws, rdraws
    return None


def equivalence_check(config: RunConfig, left: str | Backend = "scalar",
                      right: str | Backend = "vector") -> EquivalenceReport:
    """Run two backends in lockstep and compare every state bit for bit.

    Candidates and acceptance rows are compared before positions, so a
    divergence is reported at the iteration where it first happens even if
    the bad candidate is rejected.
    """
    lb, rb = get_backend(left), get_backend(right)
    lstream, rstream = RngStream(config.seed), RngStream(config.seed)
    lstates = iterate_states(config, lb, lstream)
    rstates = iterate_states(config, rb, rstream)
    compared = 0
    for ls, rs in zip(lstates, rstates):
        found = _compare_states(ls, rs, lstream.draws, rstream.draws)
        if found is not None:
            name, where, lv, rv = found
            return EquivalenceReport(False, compared, ls.iteration, name, where, lv, rv, lb.name, rb.name)
        compared = ls.iteration
    return EquivalenceReport(True, compared, left=lb.name, right=rb.name)


# ---------------------------------------------------------------- timing

@dataclass(frozen=True)
class ComparisonReport:
    function_id: str
    scalar_seconds: float
    vector_seconds: float
    speedup: float
    equivalent: bool


def _median_seconds(config: RunConfig, backend: str | Backend, warmups: int, reps: int) -> float:
    for _ in range(warmups):
        execute_run(config, backend)
    times = [execute_run(config, backend).elapsed_ns for _ in range(reps)]
    return statistics.median(times) / 1e9


def compare(config: RunConfig, warmups: int = 3, reps: int = 5,
            backends: tuple[str | Backend, str | Backend] = ("scalar", "vector")) -> ComparisonReport:
    """Median wall time of each backend and the ratio first / second."""
    if reps < 1:
        raise ValueError(f"reps must be >= 1, got {reps}")
    slow, fast = backends
    equivalent = equivalence_check(config, slow, fast).passed
    slow_s = _median_seconds(config, slow, warmups, reps)
    fast_s = _median_seconds(config, fast, warmups, reps)
    return ComparisonReport(config.function_id, slow_s, fast_s, slow_s / fast_s, equivalent)


# ---------------------------------------------------------------- emission

BENCH_HEADER = ("function", "backend", "runs", "mean_best", "std_best", "mean_seconds")
TRACE_HEADER = ("iteration", "best_fitness", "best_agent_index")
COMPARE_HEADER = ("function", "scalar_seconds", "vector_seconds", "speedup", "equivalent")


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def trajectory_header(dimension: int) -> tuple[str, ...]:
    return ("iteration", "agent", *(f"d{i}" for i in range(dimension)))


@dataclass(frozen=True)
class TrajectoryRow:
    iteration: int
    agent: int
    position: tuple[float, ...]


def trajectory(config: RunConfig, backend: str | Backend = "vector") -> list[TrajectoryRow]:
    """Every agent's position after every iteration (initial state excluded)."""
    rows = []
    for state in iterate_states(config, backend):
        if state.iteration == 0:
            continue
        cols = state.population.T.tolist()
        rows.extend(TrajectoryRow(state.iteration, a, tuple(c)) for a, c in enumerate(cols))
    return rows


def _csv_rows(results, schema: str, dimension: int | None) -> tuple[tuple[str, ...], list[list[str]]]:
    if schema == "bench":
        return BENCH_HEADER, [
            [s.function_id, s.backend, str(s.runs), fmt_float(s.mean_best),
             fmt_float(s.std_best), fmt_float(s.mean_seconds)] for s in results]
    if schema == "trace":
        return TRACE_HEADER, [
            [str(e.iteration), fmt_float(e.best_fitness), str(e.best_index)] for e in results]
    if schema == "compare":
        return COMPARE_HEADER, [
            [c.function_id, fmt_float(c.scalar_seconds), fmt_float(c.vector_seconds),
             fmt_float(c.speedup), str(c.equivalent).lower()] for c in results]
    if schema == "trajectory":
        if dimension is None:
            dimension = len(results[0].position) if results else 0
        return trajectory_header(dimension), [
            [str(t.iteration), str(t.agent), *map(fmt_float, t.position)] for t in results]
    raise ValueError(f"unknown schema {schema!r}")


def _json_text(value) -> str:
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value) if math.isfinite(value) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_text(v)}" for k, v in value.items()) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_json_text(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _as_record(item, schema: str) -> dict:
    if schema == "bench":
        return dict(zip(BENCH_HEADER, (item.function_id, item.backend, item.runs,
                                       item.mean_best, item.std_best, item.mean_seconds)))
    if schema == "trace":
        return dict(zip(TRACE_HEADER, (item.iteration, item.best_fitness, item.best_index)))
    if schema == "compare":
        return {"function_id": item.function_id, "scalar_seconds": item.scalar_seconds,
                "vector_seconds": item.vector_seconds, "speedup": item.speedup,
                "equivalent": item.equivalent}
    if schema == "trajectory":
        return {"iteration": item.iteration, "agent": item.agent, "position": list(item.position)}
    raise ValueError(f"unknown schema {schema!r}")


def _infer_schema(results) -> str:
    if isinstance(results, RunResult):
        return "trace"
    if not results:
        raise ValueError("schema is required for an empty result set")
    kinds = {TrialStats: "bench", TraceEntry: "trace", ComparisonReport: "compare",
             TrajectoryRow: "trajectory"}
    for cls, name in kinds.items():
        if isinstance(results[0], cls):
            return name
    raise TypeError(f"cannot emit {type(results[0]).__name__}")


def render_results(results, fmt: str = "csv", schema: str | None = None,
                   dimension: int | None = None) -> str:
    """Serialize deterministically: fixed columns, 17 significant digits, trailing newline."""
    schema = schema or _infer_schema(results)
    run = results if isinstance(results, RunResult) else None
    items = run.trace if run is not None else list(results)
    if fmt == "csv":
        header, rows = _csv_rows(items, schema, dimension)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buf.getvalue()
    if fmt == "json":
        if run is not None:
            payload = {"backend": run.backend, "config": run.config.as_dict(),
                       "final_best": run.final_best, "elapsed_ns": run.elapsed_ns,
                       "trace": [_as_record(e, "trace") for e in items]}
        elif schema == "compare" and len(items) == 1:
            payload = _as_record(items[0], schema)
        else:
            payload = [_as_record(i, schema) for i in items]
        return _json_text(payload) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_results(results, fmt: str = "csv", destination: str | Path | TextIO | None = None,
                 schema: str | None = None, dimension: int | None = None) -> str:
    """Write rendered results to a path, an open stream, or stdout."""
    text = render_results(results, fmt, schema, dimension)
    if destination is None:
        sys.stdout.write(text)
    elif hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text


def parse_csv(text: str) -> tuple[list[str], list[dict[str, str]]]:
    reader = csv.DictReader(io.StringIO(text))
    return list(reader.fieldnames or []), list(reader)
