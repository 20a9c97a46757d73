import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaoslab.dyadic import (
    DyadicStep,
    constant,
    equimeasurable,
    indicator,
    integral,
    make_step,
    pointwise,
    rearrangement,
    refine,
)
from chaoslab.errors import PreconditionError
from chaoslab.sampling import random_step, rng_for
from chaoslab.spaces import NormSpec, norm
from chaoslab.walsh import rademacher

from conftest import steps


def test_make_step_examples():
    one = make_step(0, [1])
    assert one.same_function(constant(1.0, 3))
    two = make_step(1, [1, -1])
    assert list(two.values) == [1.0, -1.0]
    assert integral(make_step(2, [3, 1, 1, 3])) == 2.0


@pytest.mark.parametrize("level, values", [(1, [1.0]), (2, [1, 2, 3]), (0, [np.nan]), (1, [np.inf, 0])])
def test_make_step_rejects_bad_input(level, values):
    with pytest.raises(PreconditionError):
        make_step(level, values)


def test_values_are_read_only():
    x = make_step(1, [1, 2])
    with pytest.raises(ValueError):
        x.values[0] = 5.0


def test_refine_examples():
    assert np.all(refine(constant(1.0), 3).values == 1.0)
    assert list(refine(make_step(1, [1, -1]), 2).values) == [1, 1, -1, -1]
    with pytest.raises(PreconditionError):
        refine(make_step(2, [1, 2, 3, 4]), 1)


def test_refine_preserves_integral_on_corpus():
    rng = rng_for(0)
    for _ in range(100):
        x = random_step(rng, int(rng.integers(0, 7)))
        assert integral(refine(x, x.level + 3)) == pytest.approx(integral(x), rel=1e-12, abs=1e-12)


def test_pointwise_examples():
    r = make_step(1, [1, -1])
    assert pointwise("mul", r, r).same_function(constant(1.0))
    x = make_step(2, [1, -2, 3, 0.5])
    assert np.all(pointwise("add", x, pointwise("scale", x, alpha=-1.0)).values == 0)
    assert list(pointwise("abs", make_step(1, [-2, 3])).values) == [2, 3]


def test_pointwise_auto_refines():
    out = make_step(0, [2]) + make_step(2, [1, 2, 3, 4])
    assert out.level == 2 and list(out.values) == [3, 4, 5, 6]


def test_pointwise_errors():
    x = make_step(0, [1])
    with pytest.raises(PreconditionError):
        pointwise("div", x, x)
    with pytest.raises(PreconditionError):
        pointwise("add", x)


def test_integral_examples():
    assert integral(constant(-2.5, 4)) == -2.5
    assert integral(make_step(1, [1, -1])) == 0.0


def test_rearrangement_examples():
    assert list(rearrangement(make_step(1, [-1, 1])).values) == [1, 1]
    assert list(rearrangement(make_step(2, [0, 3, -1, 2])).values) == [3, 2, 1, 0]


def test_rearrangement_idempotent_and_norm_preserving():
    rng = rng_for(1)
    specs = [NormSpec.lp(p) for p in (1, 2, 3.5, np.inf)]
    for _ in range(100):
        x = random_step(rng, 6)
        xs = rearrangement(x)
        assert rearrangement(xs).same_function(xs)
        for s in specs:
            assert norm(xs, s) == pytest.approx(norm(x, s), rel=1e-12)


def test_equimeasurable_examples():
    x = make_step(2, [1, -2, 0.5, 3])
    assert equimeasurable(x, -x)
    assert not equimeasurable(constant(1.0), constant(2.0))


def test_equimeasurable_block_split():
    # f = sum_{i<=p} b_i r_i r_{k+2},  g = sum_{p<i<=q} c_i r_i r_{k+2}
    rng = rng_for(2)
    for _ in range(50):
        k = int(rng.integers(2, 6))
        p = int(rng.integers(1, k))
        q = int(rng.integers(p + 1, k + 2))
        level = k + 2
        rk = rademacher(k + 2, level)
        f = sum((rng.standard_normal() * rademacher(i, level) * rk for i in range(1, p + 1)), constant(0.0, level))
        g = sum((rng.standard_normal() * rademacher(i, level) * rk for i in range(p + 1, q + 1)), constant(0.0, level))
        assert equimeasurable(f + g, f - g)


def test_equimeasurable_needs_the_split_structure():
    # negative control: g sharing a Rademacher with f breaks the symmetry
    level = 3
    r2, r3 = rademacher(2, level), rademacher(3, level)
    f = r2 + 0.5 * constant(1.0, level)
    g = 0.25 * r2 * r3 + r2
    assert not equimeasurable(f + g, f - g)


@given(steps(max_level=5))
def test_rearrangement_properties(x):
    xs = rearrangement(x).values
    assert np.all(xs >= 0)
    assert np.all(np.diff(xs) <= 0)
    assert equimeasurable(x, rearrangement(x), tol=0.0)


@given(steps(max_level=4), st.integers(0, 3))
def test_refine_invisible_to_equimeasurability(x, extra):
    assert equimeasurable(x, refine(x, x.level + extra), tol=0.0)
    assert integral(refine(x, x.level + extra)) == pytest.approx(integral(x), rel=1e-12, abs=1e-9)


@given(steps(max_level=4), st.integers(0, 2**31 - 1))
def test_equimeasurable_is_symmetric_and_permutation_invariant(x, seed):
    perm = np.random.default_rng(seed).permutation(x.size)
    y = DyadicStep(x.level, x.values[perm])
    assert equimeasurable(x, y) and equimeasurable(y, x)


def test_indicator():
    assert list(indicator(0.5, 2).values) == [1, 1, 0, 0]
    with pytest.raises(PreconditionError):
        indicator(0.3, 2)


def test_serialization_round_trip():
    x = make_step(3, np.arange(8) - 2.5)
    assert DyadicStep.from_dict(x.to_dict()).same_function(x)
