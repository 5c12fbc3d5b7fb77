import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from antnest.core import RngStream
from antnest.functions import (
    DimensionMismatchError,
    UnknownFunctionError,
    available,
    cost_amplify,
    evaluate,
    evaluate_population,
    lookup,
)

NAMES = available()


# Textbook formulas written without any of the package's helpers.
def _textbook(name, x):
    d = len(x)
    if name == "sphere":
        return sum(v * v for v in x)
    if name == "abs_plus_prod":
        return sum(abs(v) for v in x) + math.prod(abs(v) for v in x)
    if name == "cumsum_sq":
        return sum(sum(x[: i + 1]) ** 2 for i in range(d))
    if name == "max_abs":
        return max(abs(v) for v in x)
    if name == "rosenbrock":
        return sum(100 * (x[i + 1] - x[i] ** 2) ** 2 + (x[i] - 1) ** 2 for i in range(d - 1))
    if name == "step":
        return sum(math.floor(v + 0.5) ** 2 for v in x)
    if name == "rastrigin":
        return sum(v * v - 10 * math.cos(2 * math.pi * v) + 10 for v in x)
    if name == "ackley":
        return (-20 * math.exp(-0.2 * math.sqrt(sum(v * v for v in x) / d))
                - math.exp(sum(math.cos(2 * math.pi * v) for v in x) / d) + 20 + math.e)
    if name == "griewank":
        return (sum(v * v for v in x) / 4000
                - math.prod(math.cos(v / math.sqrt(i + 1)) for i, v in enumerate(x)) + 1)
    raise KeyError(name)


def test_registry_names():
    assert NAMES == ["sphere", "abs_plus_prod", "cumsum_sq", "max_abs", "rosenbrock",
                     "step", "rastrigin", "ackley", "griewank"]


def test_lookup_unknown_lists_candidates():
    with pytest.raises(UnknownFunctionError) as err:
        lookup("nosuchfn")
    assert "sphere" in str(err.value) and "rastrigin" in str(err.value)
    for bad in ("heavy_nosuch_5", "heavy_sphere_0", "heavy_sphere_x", "heavy_sphere"):
        with pytest.raises(UnknownFunctionError):
            lookup(bad)


def test_lookup_heavy():
    spec = lookup("heavy_sphere_1000")
    assert spec.id == "heavy_sphere_1000"
    assert spec.known_optimum_value == 0.0
    assert lookup(spec.id).id == spec.id
    assert lookup("heavy_abs_plus_prod_3").id == "heavy_abs_plus_prod_3"


def test_hand_values():
    assert evaluate(lookup("sphere", 3), [1, 2, 3]) == 14.0
    assert evaluate(lookup("sphere"), [0.0] * 10) == 0.0
    assert evaluate(lookup("rosenbrock"), [1.0] * 10) == 0.0
    assert evaluate(lookup("rastrigin"), [0.0] * 10) == 0.0


@pytest.mark.parametrize("name", NAMES)
def test_optimum_anchor(name):
    spec = lookup(name)
    assert abs(evaluate(spec, spec.optimizer()) - spec.known_optimum_value) <= 1e-12


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("dim", [1, 2, 10])
def test_matches_textbook_formula(name, dim):
    spec = lookup(name, dim)
    pop = RngStream(dim).uniform_block(-100.0, 100.0, dim * 20).reshape(20, dim)
    for x in pop.tolist():
        want = _textbook(name, x)
        assert evaluate(spec, x) == pytest.approx(want, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("name", NAMES)
def test_batched_equals_column_loop_seed7(name):
    spec = lookup(name)
    pop = RngStream(7).uniform_block(-100.0, 100.0, 300).reshape(30, 10).T
    got = evaluate_population(spec, pop)
    want = [evaluate(spec, pop[:, a]) for a in range(30)]
    assert got.shape == (30,)
    assert got.tolist() == want


@pytest.mark.parametrize("name", NAMES)
@settings(max_examples=40, deadline=None)
@given(data=st.data())
def test_batched_equals_column_loop_property(name, data):
    d = data.draw(st.integers(1, 12))
    n = data.draw(st.integers(1, 9))
    pop = data.draw(arrays(np.float64, (d, n), elements=st.floats(-100, 100)))
    spec = lookup(name, d)
    got = evaluate_population(spec, pop)
    want = [evaluate(spec, pop[:, a]) for a in range(n)]
    assert got.view(np.uint64).tolist() == np.array(want).view(np.uint64).tolist()
    assert np.isfinite(got).all()


def test_zero_population_gives_row_of_zeros():
    got = evaluate_population(lookup("sphere"), np.zeros((10, 30)))
    assert got.shape == (30,) and not got.any()


def test_single_agent_population():
    col = np.array([[3.0], [-4.0]])
    assert evaluate_population(lookup("sphere", 2), col).tolist() == [25.0]


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        evaluate(lookup("sphere"), [1.0, 2.0])
    with pytest.raises(DimensionMismatchError):
        evaluate_population(lookup("sphere"), np.zeros((3, 4)))


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("k", [1, 2, 7])
def test_cost_amplify_preserves_values(name, k):
    base = lookup(name)
    heavy = cost_amplify(base, k)
    pop = RngStream(k).uniform_block(-100.0, 100.0, 50).reshape(5, 10).T
    assert evaluate_population(heavy, pop).tolist() == evaluate_population(base, pop).tolist()
    for a in range(5):
        assert evaluate(heavy, pop[:, a]) == evaluate(base, pop[:, a])


def test_cost_amplify_rejects_zero():
    with pytest.raises(ValueError):
        cost_amplify(lookup("sphere"), 0)


def test_heavy_origin_is_zero():
    assert evaluate(lookup("heavy_sphere_1000"), [0.0] * 10) == 0.0


def test_cost_amplify_costs_more():
    x = [1.5] * 10
    light, heavy = lookup("sphere"), lookup("heavy_sphere_1000")

    def per_call(spec, reps):
        t = time.perf_counter()
        for _ in range(reps):
            evaluate(spec, x)
        return (time.perf_counter() - t) / reps

    ratio = per_call(heavy, 20) / per_call(light, 2000)
    # measured on the build machine: roughly 500x
    assert ratio >= 100


@pytest.mark.parametrize("name", NAMES)
def test_finite_on_default_box(name):
    spec = lookup(name)
    corners = np.array([[-100.0] * 10, [100.0] * 10, [-100.0, 100.0] * 5]).T
    samples = RngStream(31).uniform_block(-100.0, 100.0, 10 * 500).reshape(500, 10).T
    assert np.isfinite(evaluate_population(spec, np.hstack([corners, samples]))).all()
