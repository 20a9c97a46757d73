"""The acceptance battery: one deterministic function per criterion.

Each criterion returns a :class:`CriterionResult` whose checks aggregate a
whole corpus (worst margin plus a violation count) so reports stay small.
Checks flagged ``timing`` compare wall-clock time and are excluded from
determinism comparisons together with every ``runtime_ms`` field.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .constants import basis_constant, ruc_average, uncond_constant
from .constructions import (
    BlockSpec,
    interpolation_check,
    lemma2_witness,
    prop2_witness,
    prop3_witness,
    zk_search,
)
from .dyadic import equimeasurable, indicator, constant
from .errors import PreconditionError
from .records import Check, plain
from .sampling import FAMILIES, random_coeffs, random_step, rng_for
from .spaces import (
    EXP,
    EXP_SQUARE,
    NormSpec,
    conjugate_nfunction,
    marcinkiewicz_norm,
    marcinkiewicz_psi_constant,
    nfunction_conjugate,
    norm,
    orlicz_norm,
    psi_quasinorm,
)
from .square import lemma1_check, random_step_2d
from .walsh import ChaosCoeffs, pairs_up_to, sigma_k, synthesize

__all__ = [
    "CriterionResult",
    "CRITERIA",
    "ALL_SPECS",
    "ZK2_MIN",
    "LEMMA1_RATIO_PIN",
    "run_criterion",
    "run_suite",
    "strip_timing",
]

# Regression values frozen from the first exhaustive / corpus runs.
ZK2_MIN = 4.0
LEMMA1_RATIO_PIN = {"M": 0.9995678462026025, "N": 0.9990690480248826}

ALL_SPECS = tuple(NormSpec.parse(s) for s in ("L1", "L2", "L4", "Linf", "L_M", "L_N", "M-0.5", "M0", "M0.2"))

TIMING_KEYS = frozenset({"runtime_ms", "wall_clock_ms", "started_at"})


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)
    runtime_ms: float = 0.0
    expected_failure: Optional[str] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, *args, **kw) -> Check:
        c = Check(*args, **kw)
        self.checks.append(c)
        return c

    def add_timing(self, limit_s: float, label: str = ""):
        c = Check(f"runtime under {limit_s:g} s{label}", self.runtime_ms / 1000.0, limit_s, "<=", 0.0,
                  "desk-scale runtime budget")
        c.timing = True
        self.checks.append(c)

    def to_dict(self) -> dict:
        checks = []
        for c in self.checks:
            d = c.to_dict()
            if getattr(c, "timing", False):
                d["timing"] = True
            checks.append(d)
        out = {"criterion": self.number, "title": self.title, "pass": self.passed,
               "checks": checks, "witnesses": plain(self.witnesses), "runtime_ms": self.runtime_ms}
        if self.expected_failure:
            out["known_failure"] = self.expected_failure
        return out


def _rel(x: float) -> float:
    return max(1.0, abs(x))


def _worst(name: str, excess: np.ndarray, anchor: str, tol: float, res: CriterionResult, count_tol=None):
    """Record ``max(excess) <= 0`` (within ``tol``) with a violation count."""
    excess = np.asarray(excess, dtype=float)
    worst = float(np.max(excess)) if excess.size else 0.0
    ctol = tol if count_tol is None else count_tol
    res.witnesses[f"{name}: violations"] = int(np.count_nonzero(excess > ctol))
    res.witnesses[f"{name}: samples"] = int(excess.size)
    res.add(name, worst, 0.0, "<=", tol, anchor)


# --- criteria ------------------------------------------------------------------


def criterion_parseval(seed: int) -> CriterionResult:
    res = CriterionResult(1, "Parseval: L2 norm of the chaos equals the l2 norm of its coefficients")
    rng = rng_for([seed, 1])
    pool = pairs_up_to(8)
    errs = []
    for trial in range(1000):
        size = int(rng.integers(1, len(pool) + 1))
        pick = sorted(rng.choice(len(pool), size=size, replace=False))
        c = random_coeffs(rng, [pool[i] for i in pick], FAMILIES[trial % 2])
        errs.append(abs(norm(synthesize(c), NormSpec.lp(2)) - c.l2_norm()))
    res.witnesses["max abs error"] = float(max(errs))
    res.add("|‖y‖_2 - ‖a‖_l2| over 1000 draws", float(max(errs)), 1e-12, "<=", 0.0,
            "‖sum a_ij r_i r_j‖_2 = (sum a_ij^2)^(1/2)")
    return res


def criterion_basis(seed: int) -> CriterionResult:
    res = CriterionResult(2, "Basis constant of the chaos in L1, L2, L4 is at most 3")
    for p in (1, 2, 4):
        rep = basis_constant(NormSpec.lp(p), max_pairs=21, trials=200, seed=seed)
        res.witnesses[f"L{p}"] = rep.to_dict()
        res.add(f"L{p}: max ‖S_m y‖/‖S_n y‖", rep.max_ratio, 3.0, "<=", 1e-9,
                "‖S_m y‖_X <= 3B‖S_n y‖_X with B = 1")
        if p == 2:
            res.add("L2: max ratio is exactly 1", rep.max_ratio, 1.0, "==", 1e-12,
                    "partial sums of an orthonormal expansion contract in L2")
    return res


def criterion_sigma(seed: int) -> CriterionResult:
    res = CriterionResult(3, "Dyadic averaging contracts every L_p norm")
    rng = rng_for([seed, 3])
    specs = [NormSpec.lp(p) for p in (1, 2, 4, math.inf)]
    excess = {s.label: [] for s in specs}
    for _ in range(500):
        x = random_step(rng, 8)
        base = {s.label: norm(x, s) for s in specs}
        for k in range(9):
            sx = sigma_k(x, k)
            for s in specs:
                excess[s.label].append((norm(sx, s) - base[s.label]) / _rel(base[s.label]))
    for s in specs:
        _worst(f"{s.label}: ‖sigma_k x‖ - ‖x‖ (relative)", excess[s.label], "‖sigma_k x‖_X <= ‖x‖_X", 1e-12, res)
    return res


def _theorem1_split(rng: np.random.Generator, case: str):
    """Random ``f, g`` on the block ``r_i r_(k+2)`` split by the ``i`` index.

    ``case = "k=l"`` splits ``1..q`` at ``p``; ``case = "k<l"`` takes ``g`` to be
    the rest of the block plus a term in the first pair of the next block.
    """
    k = int(rng.integers(1, 7))
    j = k + 2
    if case == "k=l":
        p = int(rng.integers(1, k + 1))
        q = int(rng.integers(p + 1, k + 2))
        f_pairs = [(i, j) for i in range(1, p + 1)]
        g_pairs = [(i, j) for i in range(p + 1, q + 1)]
    else:
        p = int(rng.integers(1, k + 2))
        f_pairs = [(i, j) for i in range(1, p + 1)]
        g_pairs = [(i, j) for i in range(p + 1, k + 2)] + [(1, j + 1)]
    level = k + 3
    fam = FAMILIES[int(rng.integers(2))]
    f = synthesize(random_coeffs(rng, f_pairs, fam), level)
    g = synthesize(random_coeffs(rng, g_pairs, fam), level)
    return f, g


def criterion_equimeasurable(seed: int) -> CriterionResult:
    res = CriterionResult(4, "Block splits: f+g and f-g are equimeasurable, hence ‖f‖ <= ‖f+g‖")
    rng = rng_for([seed, 4])
    bad = {"k=l": 0, "k<l": 0}
    excess = {s.label: [] for s in ALL_SPECS}
    for trial in range(200):
        case = "k=l" if trial % 2 == 0 else "k<l"
        f, g = _theorem1_split(rng, case)
        if not equimeasurable(f + g, f - g):
            bad[case] += 1
        for s in ALL_SPECS:
            u = norm(f + g, s)
            excess[s.label].append((norm(f, s) - u) / _rel(u))
    for case, n in bad.items():
        res.add(f"case {case}: non-equimeasurable splits", float(n), 0.0, "==", 0.0,
                "|f+g| and |f-g| are equimeasurable")
    for s in ALL_SPECS:
        _worst(f"{s.label}: ‖f‖ - ‖f+g‖ (relative)", excess[s.label], "‖f‖_X <= ‖f+g‖_X", 1e-12, res)
    return res


def _ten_pair_coeffs(rng: np.random.Generator, trial: int) -> ChaosCoeffs:
    pool = pairs_up_to(7)
    pick = sorted(rng.choice(len(pool), size=10, replace=False))
    return random_coeffs(rng, [pool[i] for i in pick], FAMILIES[trial % 2])


def criterion_uncond_l2(seed: int) -> CriterionResult:
    res = CriterionResult(5, "Unconditional constant in L2 is exactly 1")
    rng = rng_for([seed, 5])
    worst = 0.0
    for trial in range(20):
        rep = uncond_constant(NormSpec.lp(2), _ten_pair_coeffs(rng, trial))
        worst = max(worst, abs(rep.max_ratio - 1.0), abs(rep.min_ratio - 1.0))
    res.witnesses["coefficient sets"] = 20
    res.witnesses["patterns per set"] = 1 << 10
    res.add("max |ratio - 1| over all 2^10 patterns", worst, 0.0, "<=", 1e-12,
            "‖T_theta y‖_2 = ‖y‖_2 for every sign pattern")
    return res


def criterion_ruc(seed: int) -> CriterionResult:
    res = CriterionResult(6, "Random-sign average in L1 is sandwiched; Monte Carlo agrees with exact")
    rng = rng_for([seed, 6])
    spec = NormSpec.lp(1)
    low, high, zs = [], [], []
    for trial in range(50):
        c = _ten_pair_coeffs(rng, trial)
        ex = ruc_average(spec, c, "exact")
        mc = ruc_average(spec, c, "montecarlo", samples=10_000, seed=seed + trial)
        low.append((ex.min_norm - ex.mean) / _rel(ex.mean))
        high.append((ex.mean - c.l2_norm()) / _rel(c.l2_norm()))
        zs.append(abs(mc.mean - ex.mean) / mc.stderr if mc.stderr > 0 else 0.0)
    _worst("min_theta ‖T_theta y‖_1 - average (relative)", low, "min_theta ‖T_theta y‖ <= E_theta ‖T_theta y‖",
           1e-12, res)
    _worst("average - ‖a‖_l2 (relative)", high, "E_theta ‖T_theta y‖_1 <= ‖y‖_2 = ‖a‖_l2", 1e-12, res)
    res.witnesses["max |MC - exact| / stderr"] = float(max(zs))
    res.add("Monte Carlo within 4 standard errors", float(max(zs)), 4.0, "<=", 0.0,
            "|mean_MC - mean_exact| <= 4 stderr")
    return res


def criterion_lemma2(seed: int) -> CriterionResult:
    res = CriterionResult(7, "Block rearrangement lower bound with its nonnegative-tail argument")
    rng = rng_for([seed, 7])
    for K, level in ((2, 8), (3, 16)):
        t0 = time.perf_counter()
        fails: dict = {}
        min_margin = math.inf
        for _ in range(20):
            c = rng.uniform(0.05, 2.0, size=K)
            rec = lemma2_witness(BlockSpec.powers_of_two(K, c), K=K, level=level)
            min_margin = min(min_margin, rec.witnessed_constant)
            for chk in rec.checkpoints:
                kind = chk.name.split(" at ")[0]
                key = f"{kind} at t_{chk.name.rsplit('_', 1)[-1]}"
                fails.setdefault(key, [0, math.inf])
                fails[key][0] += 0 if chk.passed else 1
                fails[key][1] = min(fails[key][1], chk.margin)
        for key, (n, m) in fails.items():
            anchor = {
                "rearrangement lower bound": "y*(t_k) >= sum_{l<=k} m_l c_l",
                "early blocks constant near 0": "y_l = m_l on (0, 2 t_k) for l <= k",
                "nonnegative tail measure": "|{t in (0, 2t_k): tail >= 0}| >= t_k",
            }[key.split(" at ")[0]]
            res.add(f"K={K} level {level}: {key}: failing sequences", float(n), 0.0, "==", 0.0, anchor)
            res.witnesses[f"K={K}: {key}: min margin"] = float(m)
        res.witnesses[f"K={K}: min lower-bound margin"] = float(min_margin)
        if K == 3:
            res.runtime_ms = 1000.0 * (time.perf_counter() - t0)
            res.add_timing(120.0, " at level 16")
    if not res.passed:
        res.expected_failure = ("at K=3 the tail beyond block 2 on (0, 2 t_2) is c_3 y_3 alone, and y_3 >= 0 "
                                "on only 74/256 of that set, so the measure claim fails for every positive c")
    return res


def criterion_zk(seed: int) -> CriterionResult:
    res = CriterionResult(8, "Exhaustive minimum sup norm of the signed blocks")
    z1, z2 = zk_search(1, seed=seed), zk_search(2, seed=seed)
    res.witnesses["k=1"] = z1.to_dict()
    res.witnesses["k=2"] = z2.to_dict()
    res.add("k=1 patterns searched", float(2 ** z1.pairs), 2.0, "==", 0.0, "2 sign patterns on one pair")
    res.add("k=1 minimum sup", z1.sup_norm, 1.0, "==", 0.0, "min_theta ‖z_1‖_inf = 1")
    res.add("k=2 patterns searched", float(2 ** z2.pairs), 64.0, "==", 0.0, "64 sign patterns on six pairs")
    res.add("k=2 minimum sup equals pinned value", z2.sup_norm, ZK2_MIN, "==", 0.0,
            "min_theta ‖z_2‖_inf (exhaustive)")
    res.add("k=2 minimum is an even integer", float(z2.sup_norm % 2), 0.0, "==", 0.0,
            "sums of six +-1 products are even")
    res.add("k=2 minimum at least 4", z2.sup_norm, 4.0, ">=", 0.0, "min_theta ‖z_2‖_inf in [4, 6]")
    res.add("k=2 minimum at most 6", z2.sup_norm, 6.0, "<=", 0.0, "min_theta ‖z_2‖_inf in [4, 6]")
    return res


def criterion_witnesses(seed: int) -> CriterionResult:
    res = CriterionResult(9, "Bounded and Marcinkiewicz chaos witnesses with positive constants")
    p2 = prop2_witness(0.25, K=2, seed=seed)
    p3 = prop3_witness(0.0, 0.1, K=2, seed=seed)
    for rec in (p2, p3):
        for c in rec.checkpoints:
            c.name = f"{rec.construction}: {c.name}"
            res.checks.append(c)
    res.witnesses["b (eps=1/4, K=2)"] = p2.witnessed_constant
    res.witnesses["d (eps=0, delta=0.1, K=2)"] = p3.witnessed_constant
    res.witnesses["prop2 details"] = p2.details
    res.witnesses["prop3 details"] = p3.details
    return res


def criterion_interpolation(seed: int) -> CriterionResult:
    res = CriterionResult(10, "Sup-form interpolation inequality with constant 1")
    rng = rng_for([seed, 10])
    steps = [random_step(rng, 8) for _ in range(500)]
    for u in (0.25, 0.5, 0.75):
        recs = [interpolation_check(x, u) for x in steps]
        form = [(r.weighted_sup - r.split_bound) / _rel(r.split_bound) for r in recs]
        chain = [r.end_to_end_constant - r.psi_constant for r in recs]
        _worst(f"u={u:g}: sup x* w^u - (sup x*)^(1-u) (sup x* w)^u (relative)", form,
               "sup x* w^u <= (sup x*)^(1-u) (sup x* w)^u", 1e-12, res)
        _worst(f"u={u:g}: end-to-end constant - C_phi", chain,
               "‖x‖_{M(phi_eps)} <= C_phi ‖x‖_inf^(1-u) ‖x‖_{M(phi_-1/2)}^u", 1e-12, res)
        res.witnesses[f"u={u:g}: max end-to-end constant"] = float(max(r.end_to_end_constant for r in recs))
    return res


def criterion_psi(seed: int) -> CriterionResult:
    res = CriterionResult(11, "Sup-form quasinorm against the Marcinkiewicz norm, both directions")
    rng = rng_for([seed, 11])
    steps = [random_step(rng, 8) for _ in range(500)]
    for eps in (-0.5, 0.0, 0.2):
        cphi = marcinkiewicz_psi_constant(eps)
        res.witnesses[f"eps={eps:g}: C_phi"] = cphi
        lower, upper = [], []
        for x in steps:
            psi, m = psi_quasinorm(x, eps), marcinkiewicz_norm(x, eps)
            lower.append((psi - m) / _rel(m))
            upper.append((m - cphi * psi) / _rel(m))
        _worst(f"eps={eps:g}: Psi - ‖.‖_M (relative)", lower, "Psi_eps(x) <= ‖x‖_{M(phi_eps)}", 1e-12, res)
        _worst(f"eps={eps:g}: ‖.‖_M - C_phi Psi (relative)", upper, "‖x‖_{M(phi_eps)} <= C_phi Psi_eps(x)",
               1e-12, res)
    return res


def criterion_lemma1(seed: int) -> CriterionResult:
    res = CriterionResult(12, "Mixed Orlicz norms on the square: imbedding chain")
    for A in (EXP, EXP_SQUARE):
        rng = rng_for([seed, 12])
        recs = [lemma1_check(random_step_2d(rng, 6, 6), A) for _ in range(500)]
        first = [(r.product - r.sup_inner) / _rel(r.sup_inner) for r in recs]
        _worst(f"{A.name}: ‖x‖_{{L_A(IxI)}} - ‖x‖_{{Linf[L_A]}} (relative)", first,
               "‖x‖_{L_A(IxI)} <= ‖x‖_{Linf[L_A]}", 1e-9, res)
        top = max(r.ratio for r in recs)
        res.witnesses[f"{A.name}: max ‖x‖_{{L1[L_A]}} / ‖x‖_{{L_A(IxI)}}"] = top
        res.add(f"{A.name}: L1[L_A] ratio within pinned constant", top, LEMMA1_RATIO_PIN[A.name], "<=", 1e-9,
                "‖x‖_{L1[L_A]} <= C ‖x‖_{L_A(IxI)}")
    return res


def criterion_orlicz(seed: int) -> CriterionResult:
    res = CriterionResult(13, "Orlicz closed forms and double conjugation")
    one = orlicz_norm(constant(1.0), EXP)
    half = orlicz_norm(indicator(0.5, 1), EXP)
    res.add("‖1‖_{L_M}", one, 1 / math.log(2.0), "==", 1e-9, "‖1‖_{L_M} = 1/ln 2")
    res.add("‖chi_(0,1/2]‖_{L_M}", half, 1 / math.log(3.0), "==", 1e-9, "‖chi_(0,1/2]‖_{L_M} = 1/ln 3")
    grid = np.logspace(-2, math.log10(3.0), 25)
    for A in (EXP, EXP_SQUARE):
        star = conjugate_nfunction(A)
        back = nfunction_conjugate(star, grid, numeric=True)
        err = float(np.max(np.abs(back - A(grid)) / np.maximum(1.0, A(grid))))
        res.witnesses[f"{A.name}: max round-trip error"] = err
        res.add(f"{A.name}: (A*)* = A on a log grid", err, 0.0, "<=", 1e-6, "(A*)* = A")
    return res


CRITERIA: dict[int, Callable[[int], CriterionResult]] = {
    1: criterion_parseval,
    2: criterion_basis,
    3: criterion_sigma,
    4: criterion_equimeasurable,
    5: criterion_uncond_l2,
    6: criterion_ruc,
    7: criterion_lemma2,
    8: criterion_zk,
    9: criterion_witnesses,
    10: criterion_interpolation,
    11: criterion_psi,
    12: criterion_lemma1,
    13: criterion_orlicz,
}

_LIMITS = {1: 5.0, 2: 60.0}


def run_criterion(number: int, seed: int = 0) -> CriterionResult:
    if number not in CRITERIA:
        raise PreconditionError(f"unknown criterion {number}; known: {sorted(CRITERIA)}")
    t0 = time.perf_counter()
    res = CRITERIA[number](seed)
    if number != 7:
        res.runtime_ms = 1000.0 * (time.perf_counter() - t0)
    if number in _LIMITS:
        res.add_timing(_LIMITS[number])
    return res


def run_suite(seed: int = 0, only: Optional[list] = None) -> list[CriterionResult]:
    """Run criteria 1-13 (or the listed subset) in order.  Determinism of the
    whole run is the fourteenth criterion and is checked by re-running."""
    numbers = sorted(CRITERIA) if only is None else list(only)
    return [run_criterion(n, seed) for n in numbers]


def strip_timing(obj):
    """Drop timing fields (and the measured side of timing checks) from a report tree."""
    if isinstance(obj, dict):
        if obj.get("timing") is True:
            return {k: v for k, v in obj.items() if k not in ("lhs", "margin", "pass")}
        return {k: strip_timing(v) for k, v in obj.items() if k not in TIMING_KEYS}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj
