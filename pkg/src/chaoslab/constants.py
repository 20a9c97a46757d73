"""Empirical constants of the order-2 chaos in a symmetric norm.

Estimators for the basis constant, the unconditionality constant, the two
sided l2-equivalence ratios, Rademacher (RUC) averages over sign patterns,
and the best-signs minimisation.

Sign patterns over ``P`` pairs are enumerated by an integer ``idx`` in
``[0, 2**P)``: the sign of the ``k``-th pair (linear order) is ``+1`` when bit
``P-1-k`` of ``idx`` is set.  Increasing ``idx`` is lexicographic order with
``-1 < +1``, which gives the deterministic tie-break used everywhere.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .errors import PreconditionError
from .sampling import FAMILIES, coefficient_vector, rng_for
from .spaces import NormSpec, norms
from .walsh import ChaosCoeffs, SignPattern, chaos_matrix, pairs_up_to, to_pair

__all__ = [
    "ConstantReport",
    "RucEstimate",
    "basis_constant",
    "uncond_constant",
    "equivalence_ratios",
    "ruc_average",
    "best_signs",
    "signed_norms",
    "sign_matrix",
    "descent_search",
    "EXHAUSTIVE_LIMIT",
    "RUC_EXACT_LIMIT",
]

EXHAUSTIVE_LIMIT = 20
RUC_EXACT_LIMIT = 14
TIE_RTOL = 1e-12
_CHUNK_CELLS = 1 << 22


@dataclass
class ConstantReport:
    norm_spec: NormSpec
    sample_count: int
    max_ratio: float
    min_ratio: float
    witness_coeffs: Optional[ChaosCoeffs]
    witness_index: Any  # (m, n) for basis constants, SignPattern for sign searches
    seed: Optional[int]
    min_witness_coeffs: Optional[ChaosCoeffs] = None
    min_witness_index: Any = None
    runtime_ms: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def idx(w):
            if isinstance(w, SignPattern):
                return w.to_list()
            return list(w) if w is not None else None

        return {
            "spec": self.norm_spec.to_dict(),
            "samples": self.sample_count,
            "max_ratio": self.max_ratio,
            "min_ratio": self.min_ratio,
            "witness_coeffs": self.witness_coeffs.to_list() if self.witness_coeffs is not None else None,
            "witness_m_n_or_pattern": idx(self.witness_index),
            "min_witness_coeffs": self.min_witness_coeffs.to_list() if self.min_witness_coeffs is not None else None,
            "min_witness_m_n_or_pattern": idx(self.min_witness_index),
            "seed": self.seed,
            "runtime_ms": self.runtime_ms,
            **self.extra,
        }


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1e3, 3)


def sign_matrix(P: int, start: int, stop: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    bits = (idx[:, None] >> (P - 1 - np.arange(P))) & 1
    return (2 * bits - 1).astype(float)


def _pattern(pairs, P: int, idx: int) -> SignPattern:
    return SignPattern.from_array(pairs, sign_matrix(P, idx, idx + 1)[0])


def signed_norms(spec: NormSpec, c: ChaosCoeffs, signs: np.ndarray, level: Optional[int] = None) -> np.ndarray:
    """Norm of ``sum theta a r_i r_j`` for each row ``theta`` of ``signs``."""
    level = c.min_level if level is None else level
    phi = chaos_matrix(c.pairs, level)
    a = c.coefficients()
    rows = max(1, _CHUNK_CELLS >> level)
    out = np.empty(signs.shape[0])
    for s in range(0, signs.shape[0], rows):
        block = signs[s:s + rows] * a
        out[s:s + rows] = norms(block @ phi, level, spec)
    return out


def _all_signed_norms(spec: NormSpec, c: ChaosCoeffs, level: Optional[int] = None) -> np.ndarray:
    P = len(c)
    level = c.min_level if level is None else level
    phi = chaos_matrix(c.pairs, level)
    a = c.coefficients()
    total = 1 << P
    rows = max(1, _CHUNK_CELLS >> level)
    out = np.empty(total)
    for s in range(0, total, rows):
        e = min(total, s + rows)
        out[s:e] = norms((sign_matrix(P, s, e) * a) @ phi, level, spec)
    return out


def _first_within(values: np.ndarray, target: float, rtol: float = TIE_RTOL) -> int:
    tol = rtol * max(abs(target), 1e-300)
    return int(np.flatnonzero(np.abs(values - target) <= tol)[0])


def basis_constant(spec: NormSpec, max_pairs: int = 21, trials: int = 200, seed: int = 0) -> ConstantReport:
    """Largest ``||P_m y|| / ||P_n y||`` over ``0 < m < n <= max_pairs``.

    ``P_m`` keeps the first ``m`` chaos terms in linear order.  Trials alternate
    between Gaussian and sparse +-1 coefficient draws.
    """
    if max_pairs < 2 or trials < 1:
        raise PreconditionError("basis_constant needs max_pairs >= 2 and trials >= 1")
    t0 = time.perf_counter()
    pairs = [to_pair(m) for m in range(1, max_pairs + 1)]
    level = pairs[-1][1] - 1
    phi = chaos_matrix(pairs, level)
    rng = rng_for(seed)
    best = (-np.inf, None, None)
    worst = (np.inf, None, None)
    count = 0
    iu = np.triu_indices(max_pairs, k=1)  # (m-1, n-1) with m < n
    for t in range(trials):
        a = coefficient_vector(rng, max_pairs, FAMILIES[t % 2])
        partial = np.cumsum(a[:, None] * phi, axis=0)
        nrm = norms(partial, level, spec)
        num, den = nrm[iu[0]], nrm[iu[1]]
        ok = den > 0
        if not ok.any():
            continue
        ratios = num[ok] / den[ok]
        count += int(ok.sum())
        im, imin = int(np.argmax(ratios)), int(np.argmin(ratios))
        ms, ns = iu[0][ok] + 1, iu[1][ok] + 1
        if ratios[im] > best[0]:
            best = (float(ratios[im]), a.copy(), (int(ms[im]), int(ns[im])))
        if ratios[imin] < worst[0]:
            worst = (float(ratios[imin]), a.copy(), (int(ms[imin]), int(ns[imin])))
    return ConstantReport(
        norm_spec=spec,
        sample_count=count,
        max_ratio=best[0],
        min_ratio=worst[0],
        witness_coeffs=ChaosCoeffs.from_linear(best[1]),
        witness_index=best[2],
        min_witness_coeffs=ChaosCoeffs.from_linear(worst[1]),
        min_witness_index=worst[2],
        seed=seed,
        runtime_ms=_ms(t0),
    )


def uncond_constant(spec: NormSpec, c: ChaosCoeffs) -> ConstantReport:
    """Exhaustive ``max_theta ||T_theta y|| / ||y||`` over all ``2**P`` sign patterns."""
    P = len(c)
    if P > EXHAUSTIVE_LIMIT:
        raise PreconditionError(
            f"{P} pairs exceed the exhaustive limit {EXHAUSTIVE_LIMIT}; use best_signs for randomized search"
        )
    if P == 0:
        raise PreconditionError("uncond_constant needs at least one coefficient")
    t0 = time.perf_counter()
    vals = _all_signed_norms(spec, c)
    base = vals[-1]  # all-plus pattern
    if base == 0:
        raise PreconditionError("the chaos sum is zero; ratio undefined")
    ratios = vals / base
    hi, lo = float(ratios.max()), float(ratios.min())
    ihi, ilo = _first_within(ratios, hi), _first_within(ratios, lo)
    return ConstantReport(
        norm_spec=spec,
        sample_count=1 << P,
        max_ratio=hi,
        min_ratio=lo,
        witness_coeffs=c,
        witness_index=_pattern(c.pairs, P, ihi),
        min_witness_coeffs=c,
        min_witness_index=_pattern(c.pairs, P, ilo),
        seed=None,
        runtime_ms=_ms(t0),
        extra={"base_norm": float(base)},
    )


def equivalence_ratios(spec: NormSpec, max_index: int = 6, trials: int = 400, seed: int = 0) -> ConstantReport:
    """Range of ``||sum a r_i r_j||_X / ||a||_2`` over random ``a`` with ``j <= max_index``."""
    if not 2 <= max_index <= 10:
        raise PreconditionError(f"max_index must lie in [2, 10], got {max_index}")
    t0 = time.perf_counter()
    pairs = pairs_up_to(max_index)
    level = max_index - 1
    rng = rng_for(seed)
    A = np.stack([coefficient_vector(rng, len(pairs), FAMILIES[t % 2]) for t in range(trials)])
    nrm = norms(A @ chaos_matrix(pairs, level), level, spec)
    ratios = nrm / np.sqrt(np.sum(A * A, axis=1))
    ihi, ilo = int(np.argmax(ratios)), int(np.argmin(ratios))
    return ConstantReport(
        norm_spec=spec,
        sample_count=trials,
        max_ratio=float(ratios[ihi]),
        min_ratio=float(ratios[ilo]),
        witness_coeffs=ChaosCoeffs.from_pairs(pairs, A[ihi]),
        witness_index=(ihi,),
        min_witness_coeffs=ChaosCoeffs.from_pairs(pairs, A[ilo]),
        min_witness_index=(ilo,),
        seed=seed,
        runtime_ms=_ms(t0),
    )


@dataclass
class RucEstimate:
    mean: float
    stderr: float
    min_norm: float
    max_norm: float
    count: int
    mode: str
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _mean_within(vals: np.ndarray) -> float:
    # summation rounding can push the mean of near-equal values past their max
    return float(np.clip(vals.mean(), vals.min(), vals.max()))


def ruc_average(spec: NormSpec, c: ChaosCoeffs, mode: str = "exact", samples: int = 10_000,
                seed: int = 0) -> RucEstimate:
    """Average of ``||sum theta a r_i r_j||`` over independent uniform signs.

    ``exact`` averages over all ``2**P`` patterns; ``montecarlo`` draws
    ``samples`` seeded patterns and also reports the standard error.
    """
    P = len(c)
    if mode == "exact":
        if P > RUC_EXACT_LIMIT:
            raise PreconditionError(f"exact RUC average limited to {RUC_EXACT_LIMIT} pairs, got {P}")
        vals = _all_signed_norms(spec, c)
        return RucEstimate(_mean_within(vals), 0.0, float(vals.min()), float(vals.max()), vals.size, mode)
    if mode != "montecarlo":
        raise PreconditionError(f"mode must be 'exact' or 'montecarlo', got {mode!r}")
    if samples < 2:
        raise PreconditionError("montecarlo mode needs at least 2 samples")
    rng = rng_for(seed)
    signs = rng.choice([-1.0, 1.0], size=(samples, P))
    vals = signed_norms(spec, c, signs)
    return RucEstimate(_mean_within(vals), float(vals.std(ddof=1) / np.sqrt(samples)),
                       float(vals.min()), float(vals.max()), samples, mode, seed)


def best_signs(spec: NormSpec, c: ChaosCoeffs, budget: int = 20_000, seed: int = 0,
               level: Optional[int] = None) -> tuple[SignPattern, float]:
    """Sign pattern minimising ``||sum theta a r_i r_j||``.

    Exhaustive up to 20 pairs (lexicographically smallest minimiser); beyond
    that, seeded steepest single-flip descent with random restarts until
    ``budget`` norm evaluations are spent.
    """
    P = len(c)
    if P == 0:
        return SignPattern({}), 0.0
    if P <= EXHAUSTIVE_LIMIT:
        vals = _all_signed_norms(spec, c, level)
        i = _first_within(vals, float(vals.min()))
        return _pattern(c.pairs, P, i), float(vals[i])
    signs, value = descent_search(lambda S: signed_norms(spec, c, S, level), P, budget, seed)
    return SignPattern.from_array(c.pairs, signs), value


def descent_search(evaluate, P: int, budget: int, seed: int) -> tuple[np.ndarray, float]:
    """Steepest single-flip descent with restarts over ``{-1, +1}**P``.

    ``evaluate`` maps an ``(r, P)`` sign matrix to ``r`` objective values.
    Ties between restarts keep the lexicographically smallest pattern.
    """
    rng = rng_for(seed)
    best_s, best_v = None, np.inf
    spent = 0
    flips = 1.0 - 2.0 * np.eye(P)
    while spent < budget or best_s is None:
        s = rng.choice([-1.0, 1.0], size=P)
        v = float(evaluate(s[None, :])[0])
        spent += 1
        while True:
            cand = s[None, :] * flips
            vals = evaluate(cand)
            spent += P
            k = int(np.argmin(vals))
            if vals[k] >= v * (1 - TIE_RTOL):
                break
            s, v = cand[k], float(vals[k])
        if v < best_v * (1 - TIE_RTOL) or (abs(v - best_v) <= TIE_RTOL * best_v and tuple(s) < tuple(best_s)):
            best_s, best_v = s.copy(), v
    return best_s, best_v
