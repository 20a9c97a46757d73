import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaoslab.dyadic import DyadicStep
from chaoslab.errors import PreconditionError
from chaoslab.sampling import random_step_values, rng_for
from chaoslab.spaces import EXP, EXP_SQUARE, NormSpec, norm, orlicz_norm
from chaoslab.square import (
    DyadicStep2D,
    flatten,
    integral_2d,
    lemma1_check,
    mixed_norm,
    multiple_rademacher,
    norm_2d,
    orlicz_norm_2d,
    random_step_2d,
    remark3_compare,
)
from chaoslab.walsh import ChaosCoeffs

from conftest import coeffs

SPECS = [NormSpec.parse(s) for s in ("L1", "L2", "L4", "Linf", "L_M", "L_N", "M0")]


def test_multiple_rademacher_example():
    x = multiple_rademacher(2, 1, 1)
    assert x.values.tolist() == [[1.0, 1.0], [-1.0, -1.0]]
    with pytest.raises(PreconditionError):
        multiple_rademacher(4, 2, 2)


def test_multiple_rademacher_orthonormal():
    idx = [(i, j) for i in range(1, 5) for j in range(1, 5)]
    fs = [multiple_rademacher(i, j, 3).values for i, j in idx]
    gram = np.array([[np.mean(a * b) for b in fs] for a in fs])
    assert np.array_equal(gram, np.eye(len(idx)))


def test_integral_and_flatten():
    x = DyadicStep2D(1, 1, [[1.0, 2.0], [3.0, 4.0]])
    assert integral_2d(x) == 2.5
    assert flatten(x).level == 2
    assert sorted(flatten(x).values) == [1.0, 2.0, 3.0, 4.0]


def test_step2d_validation():
    with pytest.raises(PreconditionError):
        DyadicStep2D(1, 1, [1.0, np.nan, 0.0, 0.0])
    with pytest.raises(PreconditionError):
        DyadicStep2D(-1, 1, [1.0])
    with pytest.raises(ValueError):
        DyadicStep2D(1, 1, [1.0, 2.0, 3.0])


def test_step2d_roundtrip():
    x = random_step_2d(rng_for(3), 3, 2)
    y = DyadicStep2D.from_dict(json.loads(json.dumps(x.to_dict())))
    assert np.array_equal(x.values, y.values) and (y.level_s, y.level_t) == (3, 2)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_mixed_norm_separable(spec):
    rng = rng_for(7)
    f = random_step_values(rng, 16)
    g = random_step_values(rng, 8)
    x = DyadicStep2D(4, 3, np.outer(f, g))
    inner = norm(DyadicStep(4, f), spec)
    assert mixed_norm(x, "L1", spec) == pytest.approx(inner * np.mean(np.abs(g)), rel=1e-9)
    assert mixed_norm(x, "Linf", spec) == pytest.approx(inner * np.max(np.abs(g)), rel=1e-9)


def test_mixed_norm_constant_and_order():
    one = DyadicStep2D(2, 3, np.ones(32))
    for spec in SPECS[:4]:
        assert mixed_norm(one, "L1", spec) == pytest.approx(1.0)
    x = random_step_2d(rng_for(1), 4, 4)
    for spec in SPECS:
        assert mixed_norm(x, "L1", spec) <= mixed_norm(x, "Linf", spec) * (1 + 1e-12)
    with pytest.raises(PreconditionError):
        mixed_norm(x, "L2", SPECS[0])


def test_orlicz_2d_constant():
    one = DyadicStep2D(2, 2, np.ones(16))
    assert orlicz_norm_2d(one, EXP) == pytest.approx(1 / math.log(2), rel=1e-9)
    assert orlicz_norm_2d(one, EXP_SQUARE) == pytest.approx(1 / math.sqrt(math.log(2)), rel=1e-9)


def test_orlicz_2d_independent_of_t():
    f = random_step_values(rng_for(5), 32)
    x = DyadicStep2D(5, 3, np.repeat(f[:, None], 8, axis=1))
    for A in (EXP, EXP_SQUARE):
        assert orlicz_norm_2d(x, A) == pytest.approx(orlicz_norm(DyadicStep(5, f), A), rel=1e-9)


@given(st.integers(0, 10 ** 6), st.sampled_from([EXP, EXP_SQUARE]))
def test_lemma1_ordering(seed, A):
    x = random_step_2d(rng_for(seed), 4, 4)
    rec = lemma1_check(x, A)
    assert rec.passed
    assert rec.ratio <= 2.0 + 1e-9


def test_lemma1_single_active_column():
    # x = 1 on one t-cell: the sup of fibres is ||1||_A and the product norm is far smaller
    vals = np.zeros((16, 16))
    vals[:, 0] = 1.0
    x = DyadicStep2D(4, 4, vals)
    for A in (EXP, EXP_SQUARE):
        rec = lemma1_check(x, A)
        assert rec.passed
        assert rec.sup_inner == pytest.approx(orlicz_norm(DyadicStep(0, [1.0]), A), rel=1e-9)
        assert rec.mean_inner == pytest.approx(rec.sup_inner / 16, rel=1e-9)
        assert rec.product < rec.sup_inner


@given(coeffs(max_index=5))
def test_remark3_l2_ratio_is_one(c):
    assert remark3_compare(c, NormSpec.lp(2))["ratio"] == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_remark3_single_coefficient(spec):
    r = remark3_compare(ChaosCoeffs({(2, 4): -1.5}), spec)
    assert r["ratio"] == pytest.approx(1.0, rel=1e-9)


def test_remark3_cycle_against_enumeration():
    # r2 r3 + r3 r4 + r4 r5 + r2 r5: the line and square versions are not equidistributed
    pairs = [(2, 3), (3, 4), (4, 5), (2, 5)]
    c = ChaosCoeffs({p: 1.0 for p in pairs})
    line = [sum(r[i - 2] * r[j - 2] for i, j in pairs) for r in itertools.product((1, -1), repeat=4)]
    square = [sum(s[i - 2] * t[j - 2] for i, j in pairs)
              for s in itertools.product((1, -1), repeat=4) for t in itertools.product((1, -1), repeat=4)]
    for p in (1, 4):
        r = remark3_compare(c, NormSpec.lp(p))
        assert r["line"] == pytest.approx(np.mean(np.abs(line) ** p) ** (1 / p), rel=1e-12)
        assert r["square"] == pytest.approx(np.mean(np.abs(square) ** p) ** (1 / p), rel=1e-12)
    assert remark3_compare(c, NormSpec.lp(1))["ratio"] == pytest.approx(2 / 3)
    assert remark3_compare(c, NormSpec.sup())["ratio"] == 1.0


@pytest.mark.parametrize("spec", SPECS, ids=str)
def test_norm_2d_permutation_invariant(spec):
    x = random_step_2d(rng_for(11), 3, 3)
    perm = rng_for(12).permutation(64)
    y = DyadicStep2D(3, 3, x.values.ravel()[perm])
    assert norm_2d(x, spec) == pytest.approx(norm_2d(y, spec), rel=1e-12)


def test_remark3_level_check():
    with pytest.raises(PreconditionError):
        remark3_compare(ChaosCoeffs({(2, 5): 1.0}), NormSpec.lp(2), level=3)
