"""Explicit chaos block constructions and the finite inequality chains they satisfy.

Blocks are sums ``sum_{lo < i < j <= hi} theta_ij r_i r_j``.  With block bounds
``n_1 < n_2 < ...`` the checkpoints ``t_k = 2^-n_(k+1)`` are cell endpoints at
level ``n_(K+1)``, so the rearrangement is read off exactly there using the
left-cell convention ``x*(c 2^-n) = sorted[c - 1]``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from .constants import EXHAUSTIVE_LIMIT, descent_search, sign_matrix
from .dyadic import DyadicStep, rearrangement
from .errors import PreconditionError
from .records import VerificationRecord
from .spaces import (EXP, EXP_SQUARE, marcinkiewicz_norm, marcinkiewicz_psi_constant, orlicz_norm,
                     psi_quasinorm)
from .walsh import ChaosCoeffs, SignPattern, apply_signs, chaos_matrix, rademacher_values, synthesize

__all__ = [
    "BlockSpec",
    "block_pairs",
    "block_sum",
    "rearrangement_at",
    "lemma2_witness",
    "ZkResult",
    "zk_search",
    "prop2_witness",
    "prop3_witness",
    "InterpolationRecord",
    "interpolation_check",
    "xbar",
    "theorem2_chain",
    "EXP_MARCINKIEWICZ_LOWER",
    "EXP_MARCINKIEWICZ_UPPER",
]

CHAIN_RTOL = 1e-12


def _exp_lower_exponent() -> float:
    # largest a with 2^a / (1 - a) <= 2
    return optimize.brentq(lambda a: 2.0 ** a / (1.0 - a) - 2.0, 0.0, 0.9, xtol=1e-15)


# ||x||_{M(phi_-1/2)} / ||x||_{L_M} always lies in [EXP_MARCINKIEWICZ_LOWER, EXP_MARCINKIEWICZ_UPPER]:
# upper by Jensen on (1/t) int_0^t e^{x*/lambda}, lower from x* <= mu log2(2/t).
EXP_MARCINKIEWICZ_UPPER = math.log(2.0)
EXP_MARCINKIEWICZ_LOWER = _exp_lower_exponent() * math.log(2.0)


@dataclass(frozen=True)
class BlockSpec:
    n: tuple
    c: tuple

    def __post_init__(self):
        n = tuple(int(v) for v in self.n)
        c = tuple(float(v) for v in self.c)
        if len(n) < 2 or any(b <= a for a, b in zip(n, n[1:])) or n[0] < 1:
            raise PreconditionError(f"block bounds must be a strictly increasing positive sequence, got {n}")
        if any(not v > 0 for v in c):
            raise PreconditionError("block weights c_k must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "c", c)

    @property
    def blocks(self) -> int:
        return min(len(self.n) - 1, len(self.c))

    def t(self, k: int) -> float:
        return 2.0 ** -self.n[k]

    def m(self, k: int) -> int:
        d = self.n[k] - self.n[k - 1]
        return d * (d - 1) // 2

    @classmethod
    def powers_of_two(cls, K: int, c: Sequence[float]) -> "BlockSpec":
        return cls(tuple(2 ** k for k in range(1, K + 2)), tuple(c))


def block_pairs(lo: int, hi: int) -> list:
    return [(i, j) for j in range(lo + 2, hi + 1) for i in range(lo + 1, j)]


def block_sum(lo: int, hi: int, signs: Optional[SignPattern] = None, level: Optional[int] = None) -> DyadicStep:
    """``sum_{lo < i < j <= hi} theta_ij r_i r_j`` (``theta = +1`` when absent)."""
    if not 0 <= lo < hi:
        raise PreconditionError(f"block needs 0 <= lo < hi, got ({lo}, {hi})")
    level = hi - 1 if level is None else level
    if level < hi - 1:
        raise PreconditionError(f"r_{hi} needs level >= {hi - 1}, got {level}")
    if signs is None:
        idx = range(lo + 1, hi + 1)
        s = sum(rademacher_values(i, level) for i in idx) if hi > lo else 0.0
        # sum_{i<j} r_i r_j = ((sum r_i)^2 - count) / 2 because r_i^2 = 1
        return DyadicStep(level, (s * s - (hi - lo)) / 2.0)
    pairs = block_pairs(lo, hi)
    theta = np.array([signs.get(p) for p in pairs], dtype=float)
    return DyadicStep(level, theta @ chaos_matrix(pairs, level))


def rearrangement_at(x: DyadicStep, t: float) -> float:
    """``x*(t)`` at a cell endpoint ``t`` of ``x``'s level."""
    c = t * x.size
    if abs(c - round(c)) > 1e-9 or not 1 <= round(c) <= x.size:
        raise PreconditionError(f"t={t} is not a cell endpoint at level {x.level}")
    return float(rearrangement(x).values[int(round(c)) - 1])


def lemma2_witness(spec: BlockSpec, K: Optional[int] = None, level: Optional[int] = None) -> VerificationRecord:
    """Build ``y = sum_{k<=K} c_k y_k`` and check the rearrangement lower bound at every ``t_k``.

    Also checks the two facts the bound rests on: ``y_l = m_l`` on ``(0, 2 t_k)``
    for ``l <= k``, and the tail ``sum_{l>k} c_l y_l`` is nonnegative on a
    subset of ``(0, 2 t_k)`` of measure at least ``t_k``.
    """
    K = spec.blocks if K is None else K
    if not 1 <= K <= spec.blocks:
        raise PreconditionError(f"K must lie in [1, {spec.blocks}], got {K}")
    need = spec.n[K]
    level = need if level is None else level
    if level < need:
        raise PreconditionError(f"checkpoints need level >= n_(K+1) = {need}, got {level}")
    if level > 24:
        raise PreconditionError(f"level {level} is beyond desk scale (max 24)")
    N = 1 << level
    blocks = [block_sum(spec.n[k - 1], spec.n[k], level=level).values for k in range(1, K + 1)]
    y = DyadicStep(level, sum(spec.c[k - 1] * blocks[k - 1] for k in range(1, K + 1)))
    ys = rearrangement(y).values
    rec = VerificationRecord("lemma2", {"n": list(spec.n[: K + 1]), "c": list(spec.c[:K]), "K": K, "level": level})
    margins = []
    for k in range(1, K + 1):
        tk = spec.t(k)
        lhs = float(ys[int(tk * N) - 1])
        rhs = sum(spec.m(l) * spec.c[l - 1] for l in range(1, k + 1))
        rec.add(f"rearrangement lower bound at t_{k}", lhs, rhs, ">=", CHAIN_RTOL * max(1.0, rhs),
                "y*(t_k) >= sum_{l<=k} m_l c_l", t=tk)
        margins.append(lhs - rhs)
        head = slice(0, int(2 * tk * N))
        worst = max(float(np.max(np.abs(blocks[l - 1][head] - spec.m(l)))) for l in range(1, k + 1))
        rec.add(f"early blocks constant near 0 at t_{k}", worst, 0.0, "<=", 0.0,
                "y_l = m_l on (0, 2 t_k) for l <= k", t=tk)
        tail = sum((spec.c[l - 1] * blocks[l - 1][head] for l in range(k + 1, K + 1)), np.zeros(head.stop))
        measure = float(np.count_nonzero(tail >= 0)) / N
        rec.add(f"nonnegative tail measure at t_{k}", measure, tk, ">=", 0.0,
                "|{t in (0, 2t_k): tail >= 0}| >= t_k", t=tk)
    rec.witnessed_constant = float(min(margins))
    rec.details = {"m": [spec.m(k) for k in range(1, K + 1)], "t": [spec.t(k) for k in range(1, K + 1)]}
    return rec


@dataclass
class ZkResult:
    k: int
    signs: SignPattern
    sup_norm: float
    ratio: float  # sup_norm / 2^(3k/2)
    exhaustive: bool
    pairs: int
    all_plus_sup: float

    def step(self, level: Optional[int] = None) -> DyadicStep:
        return block_sum(2 ** self.k, 2 ** (self.k + 1), self.signs, level)

    def to_dict(self) -> dict:
        return {"k": self.k, "signs": self.signs.to_list(), "sup_norm": self.sup_norm, "ratio": self.ratio,
                "exhaustive": self.exhaustive, "pairs": self.pairs, "all_plus_sup": self.all_plus_sup}


@functools.lru_cache(maxsize=None)
def zk_search(k: int, budget: int = 20_000, seed: int = 0) -> ZkResult:
    """Signs on the block ``2^k < i < j <= 2^(k+1)`` minimising the sup norm.

    The block depends on ``q = 2^k`` independent Rademachers, so the search
    runs on the equidistributed copy ``r_2 .. r_(q+1)`` at level ``q``; the
    winner is re-evaluated at the true level.  Exhaustive up to 20 pairs
    (lexicographically smallest minimiser), seeded descent beyond.
    """
    if k < 1 or k > 3:
        raise PreconditionError(f"zk_search supports 1 <= k <= 3 at desk scale, got {k}")
    lo, hi = 2 ** k, 2 ** (k + 1)
    q = hi - lo
    true_pairs = block_pairs(lo, hi)
    phi = chaos_matrix(block_pairs(1, q + 1), q)
    P = len(true_pairs)

    def evaluate(S):
        return np.abs(S @ phi).max(axis=1)

    if P <= EXHAUSTIVE_LIMIT:
        vals = evaluate(sign_matrix(P, 0, 1 << P))
        i = int(np.flatnonzero(vals == vals.min())[0])
        best = sign_matrix(P, i, i + 1)[0]
        exhaustive = True
    else:
        best, _ = descent_search(evaluate, P, budget, seed)
        exhaustive = False
    signs = SignPattern.from_array(true_pairs, best)
    sup = float(np.max(np.abs(block_sum(lo, hi, signs).values)))
    plus = float(np.max(np.abs(block_sum(lo, hi).values)))
    return ZkResult(k, signs, sup, sup / 2 ** (1.5 * k), exhaustive, P, plus)


def _signed_chaos(K: int, weights, budget: int, seed: int):
    """Coefficients ``weights[k] * theta_ij`` on the blocks ``k = 1..K`` and the joint sign pattern."""
    entries, signs, zks = {}, {}, []
    for k in range(1, K + 1):
        zk = zk_search(k, budget, seed)
        zks.append(zk)
        for p, s in zk.signs.signs.items():
            entries[p] = weights[k - 1] * s
            signs[p] = s
    return ChaosCoeffs(entries), SignPattern(signs), zks


def _block_level(K: int, level: Optional[int]) -> int:
    need = 2 ** (K + 1)
    level = need if level is None else level
    if level < need:
        raise PreconditionError(f"checkpoint t_{K} = 2^-{need} needs level >= {need}, got {level}")
    if level > 24:
        raise PreconditionError(f"level {level} is beyond desk scale (max 24)")
    return level


def _log2_2_over(t):
    return np.log2(2.0 / np.asarray(t, dtype=float))


def prop2_witness(eps: float, K: int = 2, level: Optional[int] = None, seed: int = 0,
                  budget: int = 20_000) -> VerificationRecord:
    """Bounded chaos whose sign-flipped image has ``y*(t) >~ log2(2/t)^(1/2 - eps)``.

    ``x = sum_k 2^(-(3+2 eps) k/2) z_k`` with ``z_k`` the sup-minimising block;
    flipping by the same signs yields ``y = sum_k c_k y_k`` with unsigned
    blocks, to which the block rearrangement bound applies.
    """
    if not 0 < eps < 0.5:
        raise PreconditionError(f"eps must lie in (0, 1/2), got {eps}")
    if not 1 <= K <= 3:
        raise PreconditionError(f"K must lie in [1, 3], got {K}")
    level = _block_level(K, level)
    weights = [2.0 ** (-(3 + 2 * eps) * k / 2) for k in range(1, K + 1)]
    coeffs, theta, zks = _signed_chaos(K, weights, budget, seed)
    rec = VerificationRecord("prop2", {"eps": eps, "K": K, "level": level}, seed=seed)

    x = synthesize(coeffs, level)
    sup_x = float(np.max(np.abs(x.values)))
    block_const = max(z.ratio for z in zks)
    bound = block_const * sum(2.0 ** (-eps * k) for k in range(1, K + 1))
    rec.add("bounded witness", sup_x, bound, "<=", CHAIN_RTOL * bound,
            "||x||_inf <= max_k(||z_k||_inf 2^{-3k/2}) sum_k 2^{-eps k}")

    y = synthesize(apply_signs(coeffs, theta), level)
    unsigned = sum(w * block_sum(2 ** k, 2 ** (k + 1), level=level).values for k, w in enumerate(weights, 1))
    rec.add("sign flip gives unsigned blocks", float(np.max(np.abs(y.values - unsigned))), 0.0, "<=", 1e-12,
            "T_theta x = sum_k c_k y_k")

    ys = rearrangement(y).values
    N = 1 << level
    ratios = []
    for k in range(1, K + 1):
        tk = 2.0 ** -(2 ** (k + 1))
        val = float(ys[int(tk * N) - 1])
        mk = 2 ** k * (2 ** k - 1) // 2
        rec.add(f"pair count bound k={k}", float(mk), 2.0 ** (2 * k - 2), ">=", 0.0, "m_k >= 2^{2k-2}")
        lemma = sum((2 ** i * (2 ** i - 1) // 2) * weights[i - 1] for i in range(1, k + 1))
        quarter = 0.25 * sum(2.0 ** (2 * i) * weights[i - 1] for i in range(1, k + 1))
        geometric = 2.0 ** ((0.5 - eps) * k - 2)
        rec.add(f"rearrangement bound t_{k}", val, lemma, ">=", CHAIN_RTOL * lemma,
                "y*(t_k) >= sum_{l<=k} m_l c_l", t=tk)
        rec.add(f"quarter-sum bound t_{k}", lemma, quarter, ">=", CHAIN_RTOL * quarter,
                "sum m_l c_l >= (1/4) sum 2^{2l} c_l", t=tk)
        rec.add(f"geometric bound t_{k}", quarter, geometric, ">=", CHAIN_RTOL * geometric,
                "(1/4) sum 2^{(1/2-eps) l} >= 2^{(1/2-eps) k - 2}", t=tk)
        ratios.append(val / float(_log2_2_over(tk)) ** (0.5 - eps))
    b = min(ratios)
    rec.add("positive witnessed constant b", b, 0.0, ">", 0.0, "y*(t) >= b log2^{1/2-eps}(2/t)")
    t_grid = np.arange(1, N + 1) / N
    window = (t_grid >= 2.0 ** -(2 ** (K + 1))) & (t_grid <= 1 / 16)
    rec.witnessed_constant = b
    rec.details = {
        "checkpoint_ratios": ratios,
        "grid_min_ratio": float(np.min(ys[window] / _log2_2_over(t_grid[window]) ** (0.5 - eps))),
        "sup_norm_x": sup_x,
        "block_sup_ratios": [z.ratio for z in zks],
        "zk": [z.to_dict() for z in zks],
    }
    return rec


def prop3_witness(eps: float = 0.0, delta: float = 0.1, v: Optional[float] = None, K: int = 2,
                  level: Optional[int] = None, seed: int = 0, budget: int = 20_000) -> VerificationRecord:
    """Chaos in ``M(phi_eps)`` whose sign-flipped image has ``y*(t) >~ log2(2/t)^(1/2 + delta)``.

    Uses ``u = 1/2 - eps`` and ``x = sum_k 2^((u-3-2v) k/2) z_k``; ``v`` defaults
    to the midpoint of ``(0, 1/4 - eps/2 - delta)``.
    """
    if not -0.5 < eps < 0.5:
        raise PreconditionError(f"eps must lie in (-1/2, 1/2), got {eps}")
    top = 0.25 - eps / 2
    if not 0 < delta < top:
        raise PreconditionError(f"delta must lie in (0, {top:g}), got {delta}")
    v = (top - delta) / 2 if v is None else v
    if not 0 < v < top - delta:
        raise PreconditionError(f"v must lie in (0, {top - delta:g}), got {v}")
    if not 1 <= K <= 3:
        raise PreconditionError(f"K must lie in [1, 3], got {K}")
    level = _block_level(K, level)
    u = 0.5 - eps
    weights = [2.0 ** ((u - 3 - 2 * v) * k / 2) for k in range(1, K + 1)]
    coeffs, theta, zks = _signed_chaos(K, weights, budget, seed)
    rec = VerificationRecord("prop3", {"eps": eps, "delta": delta, "v": v, "u": u, "K": K, "level": level},
                             seed=seed)
    c_phi = marcinkiewicz_psi_constant(eps)
    per_block = []
    for zk in zks:
        z = zk.step()
        k = zk.k
        m_half = marcinkiewicz_norm(z, -0.5)
        orl = orlicz_norm(z, EXP)
        m_eps = marcinkiewicz_norm(z, eps)
        sup = float(np.max(np.abs(z.values)))
        rec.add(f"exp-Marcinkiewicz vs exp-Orlicz upper k={k}", m_half / orl, EXP_MARCINKIEWICZ_UPPER, "<=",
                CHAIN_RTOL, "M(t log2(2/t)) = L_M with ||.||_M <= ln2 ||.||_{L_M}")
        rec.add(f"exp-Marcinkiewicz vs exp-Orlicz lower k={k}", m_half / orl, EXP_MARCINKIEWICZ_LOWER, ">=",
                CHAIN_RTOL, "M(t log2(2/t)) = L_M with ||.||_{L_M} <= ||.||_M / (a ln2)")
        interp_rhs = c_phi * sup ** (1 - u) * m_half ** u
        rec.add(f"interpolation bound k={k}", m_eps, interp_rhs, "<=", CHAIN_RTOL * interp_rhs,
                "||z||_{M(phi_eps)} <= C ||z||_inf^{1-u} ||z||_{M(phi_-1/2)}^u")
        per_block.append({
            "k": k,
            "marcinkiewicz_exp": m_half,
            "orlicz_exp": orl,
            "exp_ratio": m_half / orl,
            "exp_over_2k": m_half / 2 ** k,
            "orlicz_over_2k": orl / 2 ** k,
            "marcinkiewicz_eps": m_eps,
            "growth_constant_D": m_eps / 2.0 ** ((3 - u) * k / 2),
        })

    x = synthesize(coeffs, level)
    y = synthesize(apply_signs(coeffs, theta), level)
    unsigned = sum(w * block_sum(2 ** k, 2 ** (k + 1), level=level).values for k, w in enumerate(weights, 1))
    rec.add("sign flip gives unsigned blocks", float(np.max(np.abs(y.values - unsigned))), 0.0, "<=", 1e-12,
            "T_theta x = sum_k c_k y_k")
    ys = rearrangement(y).values
    N = 1 << level
    ratios = []
    for k in range(1, K + 1):
        tk = 2.0 ** -(2 ** (k + 1))
        val = float(ys[int(tk * N) - 1])
        lemma = sum((2 ** i * (2 ** i - 1) // 2) * weights[i - 1] for i in range(1, k + 1))
        quarter = 0.25 * sum(2.0 ** (2 * i) * weights[i - 1] for i in range(1, k + 1))
        rec.add(f"rearrangement bound t_{k}", val, lemma, ">=", CHAIN_RTOL * lemma,
                "y*(t_k) >= sum_{l<=k} m_l c_l", t=tk)
        rec.add(f"quarter-sum bound t_{k}", lemma, quarter, ">=", CHAIN_RTOL * quarter,
                "sum m_l c_l >= (1/4) sum 2^{2l} c_l", t=tk)
        ratios.append(val / float(_log2_2_over(tk)) ** (0.5 + delta))
    d = min(ratios)
    rec.add("positive witnessed constant d", d, 0.0, ">", 0.0, "y*(t) >= d log2^{1/2+delta}(2/t)")
    rec.witnessed_constant = d
    rec.details = {
        "blocks": per_block,
        "checkpoint_ratios": ratios,
        "witness_marcinkiewicz_eps": marcinkiewicz_norm(x, eps),
        "psi_constant": c_phi,
        "zk": [z.to_dict() for z in zks],
    }
    return rec


@dataclass
class InterpolationRecord:
    u: float
    eps: float
    weighted_sup: float  # sup x* w^u
    split_bound: float  # (sup x*)^(1-u) (sup x* w)^u
    sup_form_ok: bool
    marcinkiewicz_eps: float
    sup_norm: float
    marcinkiewicz_exp: float
    end_to_end_constant: float  # ||x||_{M(phi_eps)} / (||x||_inf^(1-u) ||x||_{M(phi_-1/2)}^u)
    psi_constant: float
    chain_ok: bool

    @property
    def passed(self) -> bool:
        return self.sup_form_ok and self.chain_ok

    def to_dict(self) -> dict:
        return dict(self.__dict__, passed=self.passed)


def interpolation_check(x: DyadicStep, u: float, tol: float = 1e-12) -> InterpolationRecord:
    """Check ``sup x* w^u <= (sup x*)^(1-u) (sup x* w)^u`` with ``w(t) = 1/log2(2/t)``.

    The weighted sups are evaluated at cell right endpoints, where they are
    attained.  The sup-form inequality is then combined with the
    Marcinkiewicz/sup-form comparison constants into the end-to-end bound.
    """
    if not 0 < u < 1:
        raise PreconditionError(f"u must lie in (0, 1), got {u}")
    eps = 0.5 - u
    xs = rearrangement(x).values
    t = np.arange(1, x.size + 1) / x.size
    w = 1.0 / _log2_2_over(t)
    lhs = float(np.max(xs * w ** u))
    top, weighted = float(xs[0]), float(np.max(xs * w))
    rhs = top ** (1 - u) * weighted ** u
    m_eps = marcinkiewicz_norm(x, eps)
    m_half = marcinkiewicz_norm(x, -0.5)
    c_phi = marcinkiewicz_psi_constant(eps)
    denom = top ** (1 - u) * m_half ** u
    e2e = m_eps / denom if denom > 0 else 0.0
    return InterpolationRecord(
        u=u, eps=eps, weighted_sup=lhs, split_bound=rhs, sup_form_ok=lhs <= rhs + tol * max(1.0, rhs),
        marcinkiewicz_eps=m_eps, sup_norm=top, marcinkiewicz_exp=m_half, end_to_end_constant=e2e,
        psi_constant=c_phi, chain_ok=e2e <= c_phi * (1 + 1e-12),
    )


def xbar(eps: float, level: int) -> DyadicStep:
    """Right-endpoint step minorant of ``log2(2/t)^(1/2 - eps)``."""
    if not -0.5 < eps < 0.5:
        raise PreconditionError(f"eps must lie in (-1/2, 1/2), got {eps}")
    if level < 1:
        raise PreconditionError("xbar needs level >= 1")
    t = np.arange(1, (1 << level) + 1) / (1 << level)
    return DyadicStep(level, _log2_2_over(t) ** (0.5 - eps))


def theorem2_chain(K: int = 2, seed: int = 0, levels: Sequence[int] = (6, 10, 14)) -> VerificationRecord:
    """Composite run: the eps = 1/5 and (eps, delta) = (1/5, 1/10) witnesses plus the
    extremal functions that certify each inclusion of the Marcinkiewicz scale."""
    rec = VerificationRecord("theorem2-chain", {"K": K, "seed": seed, "levels": list(levels)}, seed=seed)
    p2 = prop2_witness(0.2, K, seed=seed)
    p3 = prop3_witness(0.2, 0.1, K=K, seed=seed)
    for sub in (p2, p3):
        for c in sub.checkpoints:
            c.name = f"{sub.construction}: {c.name}"
            rec.checkpoints.append(c)
    norms_02 = [marcinkiewicz_norm(xbar(0.2, n), 0.2) for n in levels]
    norms_m01 = [marcinkiewicz_norm(xbar(-0.1, n), -0.1) for n in levels]
    cap_02, cap_m01 = marcinkiewicz_psi_constant(0.2), marcinkiewicz_psi_constant(-0.1)
    rec.add("extremal eps=1/5 function bounded", max(norms_02), cap_02, "<=", CHAIN_RTOL * cap_02,
            "||xbar_eps||_{M(phi_eps)} <= C_phi")
    rec.add("extremal eps=-1/10 function bounded", max(norms_m01), cap_m01, "<=", CHAIN_RTOL * cap_m01,
            "||xbar_eps||_{M(phi_eps)} <= C_phi")
    # G inside M(phi_-1/10): ||f||_{M(phi_-1/10)} <= ||f||_{M(phi_0)} <= sqrt(ln 2) ||f||_{L_N}
    level = 2 ** (K + 1)
    for name, f in (("prop2 image", _flip_image(0.2, K, seed, level, "prop2")),
                    ("prop3 image", _flip_image(0.2, K, seed, level, "prop3"))):
        lhs = marcinkiewicz_norm(f, -0.1)
        rhs = math.sqrt(math.log(2.0)) * orlicz_norm(f, EXP_SQUARE)
        rec.add(f"{name}: M(phi_-1/10) controlled by L_N", lhs, rhs, "<=", CHAIN_RTOL * rhs,
                "||f||_{M(phi_-1/10)} <= sqrt(ln2) ||f||_{L_N}")
    rec.witnessed_constant = min(p2.witnessed_constant, p3.witnessed_constant)
    rec.details = {"b": p2.witnessed_constant, "d": p3.witnessed_constant,
                   "xbar_norms_eps_0.2": norms_02, "xbar_norms_eps_-0.1": norms_m01,
                   "psi_under_own_eps": [psi_quasinorm(xbar(0.2, n), 0.2) for n in levels]}
    return rec


def _flip_image(eps: float, K: int, seed: int, level: int, which: str) -> DyadicStep:
    if which == "prop2":
        weights = [2.0 ** (-(3 + 2 * eps) * k / 2) for k in range(1, K + 1)]
    else:
        top = 0.25 - eps / 2
        v = (top - 0.1) / 2
        weights = [2.0 ** ((0.5 - eps - 3 - 2 * v) * k / 2) for k in range(1, K + 1)]
    coeffs, theta, _ = _signed_chaos(K, weights, 20_000, seed)
    return synthesize(apply_signs(coeffs, theta), level)
