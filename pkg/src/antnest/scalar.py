"""Reference backend: one ant, one coordinate at a time.

Plain Python floats and explicit loops throughout; this is the oracle the
vectorized backend is checked against.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    BestAnt,
    RngStream,
    RunConfig,
    RunResult,
    RunState,
)
from .functions import FunctionSpec, lookup

# below this the previous tendency is treated as zero and dw falls back to r
TENDENCY_FLOOR = 1e-12


def delta_best(r: float, x: float) -> float:
    return r * x


def delta_previous(r: float, x_best: float, x: float) -> float:
    return r * (x_best - x)


def tendency(x_best_d: float, x_ref_d: float, fit_best: float, fit_ref: float) -> float:
    """Pythagorean distance between (coordinate, fitness) pairs."""
    dx = x_best_d - x_ref_d
    df = fit_best - fit_ref
    return math.sqrt(dx * dx + df * df)


def deposition_weight(r: float, t: float, t_prev: float) -> float:
    if t_prev < TENDENCY_FLOOR:
        return r
    return r * (t / t_prev)


def delta_general(dw: float, x_best: float, x: float) -> float:
    return dw * (x_best - x)


def _argmin(values: list[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] < values[best]:
            best = i
    return best


def init_population_loop(config: RunConfig, stream: RngStream) -> list[list[float]]:
    """Per-ant initializer: outer loop over agents, inner over dimensions."""
    lo, hi = config.bounds.lower, config.bounds.upper
    pop = [[0.0] * config.agents for _ in range(config.dimension)]
    for a in range(config.agents):
        for d in range(config.dimension):
            pop[d][a] = stream.uniform(lo, hi)
    return pop


def _make_state(cols, prev_cols, fit, pfit, iteration, candidate=None, accepted=None) -> RunState:
    """Pack per-agent coordinate lists back into (D, N) arrays."""
    pop_arr = np.array(cols, dtype=np.float64).T.copy()
    b = _argmin(fit)
    return RunState(
        population=pop_arr,
        previous=np.array(prev_cols, dtype=np.float64).T.copy(),
        fitness=np.array(fit, dtype=np.float64),
        previous_fitness=np.array(pfit, dtype=np.float64),
        best=BestAnt(b, fit[b], pop_arr[:, b].copy()),
        iteration=iteration,
        candidate=None if candidate is None else np.array(candidate, dtype=np.float64).T.copy(),
        accepted=None if accepted is None else np.array(accepted, dtype=bool),
    )


def init_state(config: RunConfig, stream: RngStream, spec: FunctionSpec | None = None) -> RunState:
    spec = spec or lookup(config.function_id, config.dimension)
    pop = init_population_loop(config, stream)
    cols = [list(c) for c in zip(*pop)]
    fit = [spec.scalar(c) for c in cols]
    return _make_state(cols, [c[:] for c in cols], fit, list(fit), 0)


def step(state: RunState, config: RunConfig, spec: FunctionSpec, stream: RngStream) -> RunState:
    """One iteration: move every ant, then keep only strict improvements."""
    cols = state.population.T.tolist()
    prev_cols = state.previous.T.tolist()
    fit = state.fitness.tolist()
    pfit = state.previous_fitness.tolist()
    dim = config.dimension
    bounds = config.bounds
    agent_scope = config.condition_scope == "agent"

    b = _argmin(fit)
    best_pos = cols[b][:]
    best_fit = fit[b]

    lo, hi = bounds.lower, bounds.upper
    sqrt = math.sqrt
    floor = TENDENCY_FLOOR
    # the whole iteration's random walk, agent-major: D values per ant in turn.
    # The block generator is bit-identical to per-draw stepping and far cheaper.
    walk = stream.uniform_block(-1.0, 1.0, dim * len(cols)).tolist()
    candidates = []
    for a, (xs, ps) in enumerate(zip(cols, prev_cols)):
        df = best_fit - fit[a]
        dpf = best_fit - pfit[a]
        df2, dpf2 = df * df, dpf * dpf
        if agent_scope:
            same_best = xs == best_pos
            same_prev = xs == ps
        cand = []
        for r, x, p, xb in zip(walk[a * dim:(a + 1) * dim], xs, ps, best_pos):
            if not agent_scope:
                same_best = x == xb
                same_prev = x == p
            if same_best:
                delta = delta_best(r, x)
            elif same_prev:
                delta = delta_previous(r, xb, x)
            else:
                # tendency / deposition_weight / delta_general, inlined
                dx = xb - x
                dp = xb - p
                t = sqrt(dx * dx + df2)
                t_prev = sqrt(dp * dp + dpf2)
                dw = r if t_prev < floor else r * (t / t_prev)
                delta = dw * dx
            moved = x + delta
            cand.append(lo if moved < lo else hi if moved > hi else moved)
        candidates.append(cand)

    accepted = []
    for a, cand in enumerate(candidates):
        cand_fit = spec.scalar(cand)
        ok = cand_fit < fit[a]
        accepted.append(ok)
        if ok:
            prev_cols[a] = cols[a]
            cols[a] = cand
            pfit[a] = fit[a]
            fit[a] = cand_fit

    return _make_state(cols, prev_cols, fit, pfit, state.iteration + 1, candidates, accepted)


def run(config: RunConfig) -> RunResult:
    from .harness import execute_run

    return execute_run(config, "scalar")
