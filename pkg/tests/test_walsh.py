import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chaoslab.dyadic import DyadicStep, constant, integral
from chaoslab.errors import PreconditionError
from chaoslab.sampling import random_coeffs, random_step, rng_for
from chaoslab.spaces import NormSpec, norm
from chaoslab.walsh import (
    ChaosCoeffs,
    SignPattern,
    analyze,
    apply_signs,
    chaos_matrix,
    fwht,
    pair_index,
    pair_walsh_index,
    pairs_up_to,
    partial_sum,
    rademacher,
    sigma_k,
    synthesize,
    to_linear,
    to_pair,
    walsh_paley,
    walsh_spectrum,
    walsh_spectrum_naive,
)

from conftest import coeffs, steps
from oracles import chaos_by_definition, rademacher_by_definition, walsh_by_definition


def test_rademacher_examples():
    assert rademacher(1, 0).same_function(constant(1.0))
    assert list(rademacher(2, 1).values) == [1, -1]
    with pytest.raises(PreconditionError):
        rademacher(4, 2)


@pytest.mark.parametrize("k", range(1, 9))
def test_rademacher_matches_sign_sin(k):
    assert np.array_equal(rademacher(k, 8).values, rademacher_by_definition(k, 8))


def test_rademacher_orthonormal():
    for i in range(2, 7):
        for j in range(i, 7):
            val = integral(rademacher(i, 6) * rademacher(j, 6))
            assert val == (1.0 if i == j else 0.0)


def test_walsh_paley_matches_definition():
    for n in range(64):
        assert np.array_equal(walsh_paley(n, 6).values, walsh_by_definition(n, 6))


def test_pair_index_examples():
    assert to_linear(1, 2) == 1 and to_pair(1) == (1, 2)
    assert to_linear(2, 3) == 3 and to_linear(1, 4) == 4
    for k in range(1, 21):
        assert to_linear(k, k + 1) == k * (k + 1) // 2
        assert to_linear(1, k + 1) == k * (k - 1) // 2 + 1
    assert pair_index("to_linear", (2, 3)) == 3
    assert pair_index("to_pair", 4) == (1, 4)


def test_pair_index_errors():
    for bad in [(2, 2), (3, 1), (0, 2)]:
        with pytest.raises(PreconditionError):
            to_linear(*bad)
    with pytest.raises(PreconditionError):
        to_pair(0)


@given(st.integers(1, 200_000))
def test_pair_index_bijection(m):
    assert to_linear(*to_pair(m)) == m


def test_pairs_in_linear_order():
    pairs = pairs_up_to(7)
    assert len(pairs) == 21
    assert [to_linear(*p) for p in pairs] == list(range(1, 22))


def test_pair_walsh_index():
    assert pair_walsh_index(1, 2) == 1
    assert pair_walsh_index(1, 5) == 8
    assert pair_walsh_index(2, 3) == 3
    assert pair_walsh_index(3, 5) == 10


def test_chaos_orthonormal_first_21():
    phi = chaos_matrix(pairs_up_to(7), 6)
    gram = phi @ phi.T / phi.shape[1]
    assert np.max(np.abs(gram - np.eye(21))) <= 1e-12


def test_synthesize_examples():
    r23 = synthesize(ChaosCoeffs({(2, 3): 1.0}))
    assert r23.level == 2 and list(r23.values) == [1, -1, -1, 1]
    b = 2.5
    assert synthesize(ChaosCoeffs({(1, 5): b})).same_function(b * rademacher(5, 4))
    with pytest.raises(PreconditionError):
        synthesize(ChaosCoeffs({(1, 5): 1.0}), 3)


def test_synthesize_matches_definition():
    rng = rng_for(3)
    for _ in range(20):
        c = random_coeffs(rng, pairs_up_to(8), "gaussian")
        assert np.allclose(synthesize(c).values, chaos_by_definition(c.entries, c.min_level), atol=1e-12)


def test_parseval_100():
    rng = rng_for(4)
    for t in range(100):
        c = random_coeffs(rng, pairs_up_to(int(rng.integers(2, 9))), ("gaussian", "sparse")[t % 2])
        assert abs(norm(synthesize(c), NormSpec.lp(2)) - c.l2_norm()) <= 1e-12


def test_fast_transform_matches_naive():
    rng = rng_for(5)
    for level in range(0, 9):
        x = random_step(rng, level)
        assert np.allclose(walsh_spectrum(x), walsh_spectrum_naive(x), atol=1e-12)


def test_fwht_is_involution_up_to_scale():
    a = np.random.default_rng(0).standard_normal(64)
    assert np.allclose(fwht(fwht(a)) / 64, a)


@given(coeffs(max_index=8))
def test_analyze_inverts_synthesize(c):
    res = analyze(synthesize(c))
    assert res.coeffs.allclose(c, tol=1e-12)
    assert np.max(np.abs(res.residual)) <= 1e-12


def test_analyze_examples():
    res = analyze(constant(1.0, 3))
    assert len(res.coeffs) == 0
    assert res.residual[0] == 1.0 and np.all(res.residual[1:] == 0)
    x = rademacher(2, 3) * rademacher(3, 3) * rademacher(4, 3)
    res = analyze(x)
    assert len(res.coeffs) == 0
    assert np.flatnonzero(res.residual).tolist() == [7]


def test_sigma_examples():
    x = random_step(rng_for(6), 5)
    assert sigma_k(x, 0).same_function(constant(integral(x)), tol=1e-12)
    assert np.all(sigma_k(rademacher(3, 3), 1).values == 0)
    assert sigma_k(rademacher(2, 3), 1).same_function(rademacher(2, 3))
    assert sigma_k(x, 9) is x


def test_sigma_contracts_lp():
    rng = rng_for(7)
    specs = [NormSpec.lp(p) for p in (1, 2, 4, np.inf)]
    for _ in range(200):
        x = random_step(rng, 7)
        for k in range(8):
            for s in specs:
                assert norm(sigma_k(x, k), s) <= norm(x, s) * (1 + 1e-12) + 1e-12


@given(steps(max_level=6), st.integers(0, 7), st.integers(0, 7))
def test_sigma_semigroup(x, k, l):
    a = sigma_k(sigma_k(x, k), l)
    b = sigma_k(x, min(k, l))
    assert a.same_function(b, tol=1e-9 * max(1.0, float(np.max(np.abs(x.values)))))


@given(steps(max_level=6), st.integers(0, 6))
def test_sigma_is_walsh_partial_sum(x, k):
    spec = walsh_spectrum(x)
    kept = np.zeros_like(spec)
    kept[: 1 << k] = spec[: 1 << k]
    y = sum((kept[n] * walsh_paley(n, x.level).values for n in range(min(1 << k, x.size))), np.zeros(x.size))
    assert np.allclose(sigma_k(x, k).values, y, atol=1e-9 * max(1.0, float(np.max(np.abs(x.values)))))


def test_partial_sum_examples():
    c = random_coeffs(rng_for(8), pairs_up_to(7), "gaussian")
    assert np.all(partial_sum(c, 0).values == 0)
    assert partial_sum(c, 21).same_function(synthesize(c))
    full = synthesize(c)
    for k in range(1, 7):
        assert partial_sum(c, k * (k + 1) // 2, full.level).same_function(sigma_k(full, k), tol=1e-12)


def test_apply_signs():
    c = random_coeffs(rng_for(9), pairs_up_to(5), "gaussian")
    assert apply_signs(c, SignPattern({})).allclose(c)
    theta = SignPattern({p: (-1) ** n for n, p in enumerate(c.pairs)})
    assert apply_signs(apply_signs(c, theta), theta).allclose(c)
    assert apply_signs(c, theta).l2_norm() == pytest.approx(c.l2_norm(), rel=1e-15)


def test_sign_pattern_validation():
    with pytest.raises(PreconditionError):
        SignPattern({(1, 2): 0})
    assert SignPattern({(1, 2): -1}).flipped().get((1, 2)) == 1


def test_coeff_serialization():
    c = ChaosCoeffs({(2, 5): 1.5, (1, 2): -1.0})
    assert c.pairs == [(1, 2), (2, 5)]
    assert c.to_list()[0] == {"i": 1, "j": 2, "a": -1.0}
    assert ChaosCoeffs.from_list(c.to_list()).allclose(c)
    theta = SignPattern({(1, 2): -1, (2, 5): 1})
    assert SignPattern.from_list(theta.to_list()) == theta


def test_coeff_validation():
    for bad in [{(2, 2): 1.0}, {(0, 3): 1.0}, {(1, 2): np.nan}]:
        with pytest.raises(PreconditionError):
            ChaosCoeffs(bad)
