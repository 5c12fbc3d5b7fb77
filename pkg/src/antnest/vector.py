"""Whole-population backend.

Each iteration is a handful of (D, N) matrix operations: random-walk matrix,
three disjoint branch masks, a rate-of-change matrix, one batched fitness
call and a per-agent acceptance row.  Results are bit-identical to
:mod:`antnest.scalar`.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .core import (
    BestAnt,
    RngStream,
    RunConfig,
    RunResult,
    RunState,
    ShapeMismatchError,
    clamp_to_bounds,
    init_population,
)
from .functions import FunctionSpec, evaluate_population, lookup
from .scalar import TENDENCY_FLOOR

Masks = tuple[np.ndarray, np.ndarray, np.ndarray]
MaskHook = Callable[[int, Masks], Masks]


def build_masks(population: np.ndarray, best_position: np.ndarray,
                previous: np.ndarray, scope: str = "element") -> Masks:
    """Partition every element into branch A (best), B (unmoved) or C."""
    if population.shape != previous.shape:
        raise ShapeMismatchError(f"population {population.shape} vs previous {previous.shape}")
    best_col = np.asarray(best_position).reshape(-1, 1)
    if best_col.shape[0] != population.shape[0]:
        raise ShapeMismatchError(f"best position has {best_col.shape[0]} coordinates, population has {population.shape[0]}")
    eq_best = population == best_col
    eq_prev = population == previous
    if scope == "agent":
        eq_best = np.broadcast_to(eq_best.all(axis=0), population.shape)
        eq_prev = np.broadcast_to(eq_prev.all(axis=0), population.shape)
    elif scope != "element":
        raise ValueError(f"unknown condition scope {scope!r}")
    mask_a = eq_best.copy()
    mask_b = eq_prev & ~mask_a
    mask_c = ~(mask_a | mask_b)
    return mask_a, mask_b, mask_c


def tendency_matrix(best_col: np.ndarray, ref: np.ndarray, best_fitness: float,
                    ref_fitness: np.ndarray) -> np.ndarray:
    dx = best_col - ref
    df = best_fitness - ref_fitness
    return np.sqrt(dx * dx + df * df)


def rate_of_change(population: np.ndarray, previous: np.ndarray, best: BestAnt,
                   fitness: np.ndarray, previous_fitness: np.ndarray,
                   r: np.ndarray, masks: Masks) -> np.ndarray:
    if not (population.shape == previous.shape == r.shape):
        raise ShapeMismatchError(
            f"population {population.shape}, previous {previous.shape}, r {r.shape} must agree")
    mask_a, mask_b, mask_c = masks
    best_col = best.position.reshape(-1, 1)
    distance = best_col - population

    delta = np.zeros_like(population)
    delta = np.where(mask_a, r * population, delta)
    delta = np.where(mask_b, r * distance, delta)
    if mask_c.any():
        t = tendency_matrix(best_col, population, best.fitness, fitness)
        t_prev = tendency_matrix(best_col, previous, best.fitness, previous_fitness)
        tiny = t_prev < TENDENCY_FLOOR
        ratio = np.where(tiny, 1.0, t / np.where(tiny, 1.0, t_prev))
        dw = np.where(tiny, r, r * ratio)
        delta = np.where(mask_c, dw * distance, delta)
    return delta


def init_state_vector(config: RunConfig, stream: RngStream,
                      spec: FunctionSpec | None = None) -> RunState:
    spec = spec or lookup(config.function_id, config.dimension)
    pop = init_population(config, stream)
    fit = evaluate_population(spec, pop)
    return RunState(
        population=pop,
        previous=pop.copy(),
        fitness=fit,
        previous_fitness=fit.copy(),
        best=BestAnt.from_fitness(fit, pop),
        iteration=0,
    )


def step_vector(state: RunState, config: RunConfig, spec: FunctionSpec,
                stream: RngStream, mask_hook: MaskHook | None = None) -> RunState:
    """Vectorized iteration.

    ``mask_hook`` lets tests tamper with the branch masks; it receives the
    1-based iteration number being computed and the (A, B, C) masks.
    """
    pop, prev = state.population, state.previous
    fit, pfit = state.fitness, state.previous_fitness
    dim, agents = pop.shape

    best = BestAnt.from_fitness(fit, pop)
    # drawn agent-major like the scalar loop, then viewed as (D, N)
    r = stream.uniform_block(-1.0, 1.0, dim * agents).reshape(agents, dim).T
    masks = build_masks(pop, best.position, prev, config.condition_scope)
    if mask_hook is not None:
        masks = mask_hook(state.iteration + 1, masks)
    delta = rate_of_change(pop, prev, best, fit, pfit, r, masks)
    candidate = clamp_to_bounds(pop + delta, config.bounds)

    cand_fit = evaluate_population(spec, candidate)
    accepted = cand_fit < fit

    new_pop = np.where(accepted, candidate, pop)
    new_prev = np.where(accepted, pop, prev)
    new_fit = np.where(accepted, cand_fit, fit)
    new_pfit = np.where(accepted, fit, pfit)
    return RunState(
        population=new_pop,
        previous=new_prev,
        fitness=new_fit,
        previous_fitness=new_pfit,
        best=BestAnt.from_fitness(new_fit, new_pop),
        iteration=state.iteration + 1,
        candidate=candidate,
        accepted=accepted,
    )


def run_vector(config: RunConfig) -> RunResult:
    from .harness import execute_run

    return execute_run(config, "vector")
