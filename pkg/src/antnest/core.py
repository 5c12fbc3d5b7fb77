"""Shared domain types, the SplitMix64 stream and population initialization.

Both execution backends build on this module.  Anything that touches the
random stream lives here so the draw order is defined in exactly one place:
agent-major, dimension-minor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 2.0**-53

Scope = Literal["element", "agent"]
SCOPES: tuple[str, ...] = ("element", "agent")


class InvalidIntervalError(ValueError):
    pass


class ShapeMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Bounds:
    lower: float = -100.0
    upper: float = 100.0

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise InvalidIntervalError(f"bounds must be finite, got [{lo}, {hi}]")
        if not lo < hi:
            raise InvalidIntervalError(f"lower bound {lo} must be below upper bound {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)


@dataclass(frozen=True)
class RunConfig:
    """Immutable parameters of one optimization run."""

    function_id: str = "sphere"
    dimension: int = 10
    agents: int = 30
    iterations: int = 500
    seed: int = 1
    bounds: Bounds = field(default_factory=Bounds)
    condition_scope: str = "element"

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")
        if self.agents < 1:
            raise ValueError(f"agents must be >= 1, got {self.agents}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.condition_scope not in SCOPES:
            raise ValueError(f"condition_scope must be one of {SCOPES}, got {self.condition_scope!r}")

    def as_dict(self) -> dict:
        return {
            "function": self.function_id,
            "dimension": self.dimension,
            "agents": self.agents,
            "iterations": self.iterations,
            "seed": self.seed,
            "lower": self.bounds.lower,
            "upper": self.bounds.upper,
            "scope": self.condition_scope,
        }


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class RngStream:
    """SplitMix64 generator with a draw counter.

    ``next_u64``/``uniform`` draw one value at a time; ``uniform_block``
    produces the next ``n`` values of the very same sequence in one numpy
    pass.  Because SplitMix64 is a counter generator, the k-th block value
    equals the k-th scalar draw bit for bit.
    """

    __slots__ = ("state", "draws")

    def __init__(self, seed: int = 0):
        self.state = int(seed) & MASK64
        self.draws = 0

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        self.draws += 1
        return _mix(self.state)

    def uniform(self, lo: float, hi: float) -> float:
        if not lo < hi:
            raise InvalidIntervalError(f"empty interval [{lo}, {hi})")
        return lo + (hi - lo) * ((self.next_u64() >> 11) * _INV_2_53)

    def uniform_list(self, lo: float, hi: float, n: int) -> list[float]:
        """Next ``n`` uniforms, one SplitMix64 step at a time."""
        if not lo < hi:
            raise InvalidIntervalError(f"empty interval [{lo}, {hi})")
        span = hi - lo
        s = self.state
        out = []
        for _ in range(n):
            s = (s + GOLDEN_GAMMA) & MASK64
            z = ((s ^ (s >> 30)) * _MIX1) & MASK64
            z = ((z ^ (z >> 27)) * _MIX2) & MASK64
            out.append(lo + span * (((z ^ (z >> 31)) >> 11) * _INV_2_53))
        self.state = s
        self.draws += n
        return out

    def u64_block(self, n: int) -> np.ndarray:
        steps = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self.state) + steps * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
        self.state = (self.state + n * GOLDEN_GAMMA) & MASK64
        self.draws += n
        return z

    def uniform_block(self, lo: float, hi: float, n: int) -> np.ndarray:
        if not lo < hi:
            raise InvalidIntervalError(f"empty interval [{lo}, {hi})")
        u = (self.u64_block(n) >> np.uint64(11)).astype(np.float64) * _INV_2_53
        return lo + (hi - lo) * u


def rng_next(stream: RngStream) -> int:
    return stream.next_u64()


def rng_uniform(stream: RngStream, lo: float, hi: float) -> float:
    return stream.uniform(lo, hi)


def u64_to_uniform(raw: int, lo: float, hi: float) -> float:
    """Map a raw 64-bit output onto [lo, hi) without touching any stream."""
    if not lo < hi:
        raise InvalidIntervalError(f"empty interval [{lo}, {hi})")
    return lo + (hi - lo) * (((raw & MASK64) >> 11) * _INV_2_53)


def init_population(config: RunConfig, stream: RngStream) -> np.ndarray:
    """D x N matrix whose element (d, a) is draw number a*D + d.

    The flat buffer is filled agent by agent and viewed as (D, N), which is
    the loop nesting of the per-ant initializer.
    """
    d, n = config.dimension, config.agents
    flat = stream.uniform_block(config.bounds.lower, config.bounds.upper, d * n)
    return np.ascontiguousarray(flat.reshape(n, d).T)


def clamp_to_bounds(pop: np.ndarray, bounds: Bounds) -> np.ndarray:
    lo, hi = bounds.lower, bounds.upper
    return np.where(pop < lo, lo, np.where(pop > hi, hi, pop))


def clamp_value(x: float, bounds: Bounds) -> float:
    if x < bounds.lower:
        return bounds.lower
    if x > bounds.upper:
        return bounds.upper
    return x


@dataclass(frozen=True)
class BestAnt:
    index: int
    fitness: float
    position: np.ndarray

    @classmethod
    def from_fitness(cls, fitness: np.ndarray, population: np.ndarray) -> BestAnt:
        # np.argmin already returns the first minimum
        idx = int(np.argmin(fitness))
        return cls(idx, float(fitness[idx]), population[:, idx].copy())


@dataclass(frozen=True)
class RunState:
    """Loop state shared by both backends.

    ``candidate`` and ``accepted`` hold the last step's trial positions and
    per-agent acceptance row; they are None straight after initialization.
    """

    population: np.ndarray
    previous: np.ndarray
    fitness: np.ndarray
    previous_fitness: np.ndarray
    best: BestAnt
    iteration: int = 0
    candidate: np.ndarray | None = None
    accepted: np.ndarray | None = None


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    best_fitness: float
    best_index: int


@dataclass
class RunResult:
    trace: list[TraceEntry]
    final_best: float
    elapsed_ns: int
    backend: str
    config: RunConfig
    final_state: RunState | None = field(default=None, repr=False, compare=False)
