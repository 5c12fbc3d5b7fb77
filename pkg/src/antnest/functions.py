"""Objective registry with a per-position path and a whole-population path.

Every function exists twice: ``scalar`` takes a list of D floats, ``batch``
takes a (D, N) matrix and returns N values.  The two must agree bit for bit,
so:

* reductions run strictly in ascending index order (a running accumulator in
  the scalar path, ``np.cumsum``/``np.cumprod`` along axis 0 in the batched
  path; never ``np.sum``, which may use pairwise summation);
* transcendentals go through the numpy ufunc in both paths, since numpy's
  SIMD kernels do not always match libm.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .core import Bounds

TWO_PI = 2.0 * math.pi
E = math.e

_cos = np.cos
_exp = np.exp


def _ufunc_list(f, values: list[float]) -> list[float]:
    # one ufunc call per position; numpy's result per element does not depend
    # on array length or position, which the batched path relies on
    return f(np.array(values, dtype=np.float64)).tolist()


class UnknownFunctionError(LookupError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unknown function {name!r}; available: {', '.join(available())}, heavy_<base>_<k>")


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FunctionSpec:
    id: str
    dimension: int
    bounds: Bounds
    known_optimum_value: float
    optimum_coordinate: float
    scalar: Callable[[list[float]], float]
    batch: Callable[[np.ndarray], np.ndarray]

    def optimizer(self) -> list[float]:
        return [self.optimum_coordinate] * self.dimension

    def with_dimension(self, dimension: int) -> FunctionSpec:
        if dimension < 1:
            raise DimensionMismatchError(f"dimension must be >= 1, got {dimension}")
        return replace(self, dimension=dimension)


def _seqsum(terms):
    it = iter(terms)
    acc = next(it)
    for t in it:
        acc += t
    return acc


def _seqprod(terms):
    it = iter(terms)
    acc = next(it)
    for t in it:
        acc *= t
    return acc


def _colsum(m: np.ndarray) -> np.ndarray:
    return np.cumsum(m, axis=0)[-1]


def _colprod(m: np.ndarray) -> np.ndarray:
    return np.cumprod(m, axis=0)[-1]


# -- sphere
def _sphere(x):
    return _seqsum(v * v for v in x)


def _sphere_b(X):
    return _colsum(X * X)


# -- abs_plus_prod
def _abs_plus_prod(x):
    a = [abs(v) for v in x]
    return _seqsum(a) + _seqprod(a)


def _abs_plus_prod_b(X):
    A = np.abs(X)
    return _colsum(A) + _colprod(A)


# -- cumsum_sq
def _cumsum_sq(x):
    run = x[0]
    acc = run * run
    for v in x[1:]:
        run += v
        acc += run * run
    return acc


def _cumsum_sq_b(X):
    prefix = np.cumsum(X, axis=0)
    return _colsum(prefix * prefix)


# -- max_abs
def _max_abs(x):
    return max(abs(v) for v in x)


def _max_abs_b(X):
    return np.max(np.abs(X), axis=0)


# -- rosenbrock
def _rosenbrock(x):
    if len(x) < 2:
        return 0.0
    terms = []
    for i in range(len(x) - 1):
        t = x[i + 1] - x[i] * x[i]
        u = x[i] - 1.0
        terms.append(100.0 * (t * t) + u * u)
    return _seqsum(terms)


def _rosenbrock_b(X):
    if X.shape[0] < 2:
        return np.zeros(X.shape[1])
    head, tail = X[:-1], X[1:]
    t = tail - head * head
    u = head - 1.0
    return _colsum(100.0 * (t * t) + u * u)


# -- step
def _step(x):
    terms = []
    for v in x:
        f = float(math.floor(v + 0.5))
        terms.append(f * f)
    return _seqsum(terms)


def _step_b(X):
    F = np.floor(X + 0.5)
    return _colsum(F * F)


# -- rastrigin
def _rastrigin(x):
    cos = _ufunc_list(_cos, [TWO_PI * v for v in x])
    return _seqsum(v * v - 10.0 * c + 10.0 for v, c in zip(x, cos))


def _rastrigin_b(X):
    return _colsum(X * X - 10.0 * _cos(TWO_PI * X) + 10.0)


# -- ackley
def _ackley(x):
    d = len(x)
    sq = _seqsum(v * v for v in x)
    cs = _seqsum(_ufunc_list(_cos, [TWO_PI * v for v in x]))
    return (-20.0 * float(_exp(-0.2 * math.sqrt(sq / d)))
            - float(_exp(cs / d)) + 20.0 + E)


def _ackley_b(X):
    d = X.shape[0]
    sq = _colsum(X * X)
    cs = _colsum(_cos(TWO_PI * X))
    return -20.0 * _exp(-0.2 * np.sqrt(sq / d)) - _exp(cs / d) + 20.0 + E


# -- griewank
def _griewank_divisors(d: int) -> list[float]:
    return [math.sqrt(i + 1.0) for i in range(d)]


def _griewank(x):
    div = _griewank_divisors(len(x))
    sq = _seqsum(v * v for v in x)
    pr = _seqprod(_ufunc_list(_cos, [v / s for v, s in zip(x, div)]))
    return sq / 4000.0 - pr + 1.0


def _griewank_b(X):
    div = np.array(_griewank_divisors(X.shape[0]))[:, None]
    sq = _colsum(X * X)
    pr = _colprod(_cos(X / div))
    return sq / 4000.0 - pr + 1.0


def _base(name, scalar, batch, optimum_coordinate=0.0, bounds=Bounds(-100.0, 100.0)):
    return FunctionSpec(name, 10, bounds, 0.0, optimum_coordinate, scalar, batch)


_REGISTRY: dict[str, FunctionSpec] = {
    spec.id: spec
    for spec in (
        _base("sphere", _sphere, _sphere_b),
        _base("abs_plus_prod", _abs_plus_prod, _abs_plus_prod_b),
        _base("cumsum_sq", _cumsum_sq, _cumsum_sq_b),
        _base("max_abs", _max_abs, _max_abs_b),
        _base("rosenbrock", _rosenbrock, _rosenbrock_b, optimum_coordinate=1.0),
        _base("step", _step, _step_b),
        _base("rastrigin", _rastrigin, _rastrigin_b),
        _base("ackley", _ackley, _ackley_b),
        _base("griewank", _griewank, _griewank_b),
    )
}

_HEAVY = re.compile(r"^heavy_(?P<base>[a-z_]+?)_(?P<k>[1-9][0-9]*)$")


def available() -> list[str]:
    return list(_REGISTRY)


def lookup(name: str, dimension: int | None = None) -> FunctionSpec:
    """Resolve a registry name, including ``heavy_<base>_<k>`` wrappers."""
    if name in _REGISTRY:
        spec = _REGISTRY[name]
    else:
        m = _HEAVY.match(name)
        if m is None or m["base"] not in _REGISTRY:
            raise UnknownFunctionError(name)
        spec = cost_amplify(_REGISTRY[m["base"]], int(m["k"]))
    return spec if dimension is None else spec.with_dimension(dimension)


def cost_amplify(spec: FunctionSpec, k: int) -> FunctionSpec:
    """Repeat the full evaluation k times and keep the last value.

    Same value as the base function with k times the arithmetic, standing in
    for expensive benchmark objectives.
    """
    if k < 1:
        raise ValueError(f"repetition count must be >= 1, got {k}")
    base_scalar, base_batch = spec.scalar, spec.batch

    def scalar(x):
        for _ in range(k):
            value = base_scalar(x)
        return value

    def batch(X):
        for _ in range(k):
            values = base_batch(X)
        return values

    return replace(spec, id=f"heavy_{spec.id}_{k}", scalar=scalar, batch=batch)


def evaluate(spec: FunctionSpec, position: Sequence[float]) -> float:
    x = [float(v) for v in position]
    if len(x) != spec.dimension:
        raise DimensionMismatchError(f"{spec.id} expects {spec.dimension} coordinates, got {len(x)}")
    return float(spec.scalar(x))


def evaluate_population(spec: FunctionSpec, pop: np.ndarray) -> np.ndarray:
    """Fitness row of length N for a (D, N) population."""
    pop = np.asarray(pop, dtype=np.float64)
    if pop.ndim != 2 or pop.shape[0] != spec.dimension:
        raise DimensionMismatchError(f"{spec.id} expects ({spec.dimension}, N) population, got {pop.shape}")
    return np.asarray(spec.batch(np.ascontiguousarray(pop)), dtype=np.float64)
