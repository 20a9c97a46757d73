"""Step functions on the unit square, mixed norms, and the multiple Rademacher system."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dyadic import DyadicStep
from .errors import PreconditionError
from .sampling import random_step_values
from .spaces import NFunction, NormSpec, norm, norms, orlicz_norm
from .walsh import ChaosCoeffs, rademacher_values, synthesize

__all__ = [
    "DyadicStep2D",
    "multiple_rademacher",
    "flatten",
    "integral_2d",
    "norm_2d",
    "mixed_norm",
    "orlicz_norm_2d",
    "Lemma1Record",
    "lemma1_check",
    "remark3_compare",
    "random_step_2d",
    "MIXED_OUTER",
]

MIXED_OUTER = ("L1", "Linf")


@dataclass(frozen=True, eq=False)
class DyadicStep2D:
    """``values[a, b]`` is the value on ``s``-cell ``a`` times ``t``-cell ``b``."""

    level_s: int
    level_t: int
    values: np.ndarray

    def __post_init__(self):
        if self.level_s < 0 or self.level_t < 0:
            raise PreconditionError("levels must be nonnegative")
        shape = (1 << self.level_s, 1 << self.level_t)
        vals = np.array(self.values, dtype=float).reshape(shape)
        if not np.all(np.isfinite(vals)):
            raise PreconditionError("step values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def slice_at(self, t_cell: int) -> DyadicStep:
        """The function ``s -> x(s, t)`` for ``t`` in the given ``t``-cell."""
        return DyadicStep(self.level_s, self.values[:, t_cell])

    def to_dict(self) -> dict:
        return {"level_s": self.level_s, "level_t": self.level_t, "values": self.values.ravel().tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DyadicStep2D":
        return cls(int(d["level_s"]), int(d["level_t"]), np.asarray(d["values"], dtype=float))


def multiple_rademacher(i: int, j: int, level: int) -> DyadicStep2D:
    """``r_i(s) r_j(t)`` on a ``level x level`` grid."""
    if level < max(i, j) - 1:
        raise PreconditionError(f"r_{max(i, j)} needs level >= {max(i, j) - 1}, got {level}")
    return DyadicStep2D(level, level, np.outer(rademacher_values(i, level), rademacher_values(j, level)))


def flatten(x: DyadicStep2D) -> DyadicStep:
    """Equimeasurable 1-D step on ``level_s + level_t`` (product measure)."""
    return DyadicStep(x.level_s + x.level_t, x.values.ravel())


def integral_2d(x: DyadicStep2D) -> float:
    return float(np.mean(x.values))


def norm_2d(x: DyadicStep2D, spec: NormSpec) -> float:
    # every implemented norm is rearrangement invariant, so the grid multiset suffices
    return norm(flatten(x), spec)


def mixed_norm(x: DyadicStep2D, outer: str, inner: NormSpec) -> float:
    """``|| t -> ||x(., t)||_inner ||_outer`` with ``outer`` in ``{"L1", "Linf"}``."""
    if outer not in MIXED_OUTER:
        raise PreconditionError(f"outer must be one of {MIXED_OUTER}, got {outer!r}")
    fiber = norms(x.values.T, x.level_s, inner)
    return float(fiber.mean() if outer == "L1" else fiber.max())


def orlicz_norm_2d(x: DyadicStep2D, A: NFunction) -> float:
    return orlicz_norm(flatten(x), A)


@dataclass
class Lemma1Record:
    nfunction: str
    sup_inner: float  # ||x||_{L_inf[L_A]}
    product: float  # ||x||_{L_A(I x I)}
    mean_inner: float  # ||x||_{L_1[L_A]}
    first_ok: bool
    mean_vs_sup_ok: bool

    @property
    def ratio(self) -> float:
        """``||x||_{L_1[L_A]} / ||x||_{L_A(I x I)}``; never exceeds 2 for an N-function."""
        return self.mean_inner / self.product if self.product > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.first_ok and self.mean_vs_sup_ok

    def to_dict(self) -> dict:
        return dict(self.__dict__, ratio=self.ratio, passed=self.passed)


def lemma1_check(x: DyadicStep2D, A: NFunction, tol: float = 1e-9) -> Lemma1Record:
    """Evaluate ``L_inf[L_A]``, ``L_A(I x I)`` and ``L_1[L_A]`` and check their ordering."""
    inner = NormSpec.orlicz(A)
    sup_inner = mixed_norm(x, "Linf", inner)
    mean_inner = mixed_norm(x, "L1", inner)
    product = orlicz_norm_2d(x, A)
    slack = tol * max(1.0, sup_inner)
    return Lemma1Record(A.name, sup_inner, product, mean_inner,
                        product <= sup_inner + slack, mean_inner <= sup_inner + slack)


def _chaos_2d(c: ChaosCoeffs, level: int) -> np.ndarray:
    out = np.zeros((1 << level, 1 << level))
    cache = {}
    for (i, j), a in c.entries.items():
        for k in (i, j):
            if k not in cache:
                cache[k] = rademacher_values(k, level)
        out += a * np.outer(cache[i], cache[j])
    return out


def remark3_compare(c: ChaosCoeffs, spec: NormSpec, level: Optional[int] = None) -> dict:
    """Norm of ``sum a r_i r_j`` on ``[0,1]`` against ``sum a r_i(s) r_j(t)`` on the square."""
    level = c.min_level if level is None else level
    if level < c.min_level:
        raise PreconditionError(f"coefficients need level >= {c.min_level}, got {level}")
    one = norm(synthesize(c, level), spec)
    two = norm_2d(DyadicStep2D(level, level, _chaos_2d(c, level)), spec)
    return {"spec": spec.to_dict(), "line": one, "square": two, "ratio": one / two if two > 0 else float("nan")}


def random_step_2d(rng: np.random.Generator, level_s: int = 6, level_t: int = 6) -> DyadicStep2D:
    """Random grid: i.i.d. cells, separable products, a few active rows, or row-scaled noise."""
    ns, nt = 1 << level_s, 1 << level_t
    kind = rng.integers(4)
    if kind == 0:
        vals = random_step_values(rng, ns * nt).reshape(ns, nt)
    elif kind == 1:
        vals = np.outer(random_step_values(rng, ns), random_step_values(rng, nt))
    elif kind == 2:
        vals = np.zeros((ns, nt))
        cols = rng.choice(nt, size=rng.integers(1, 4), replace=False)
        vals[:, cols] = rng.standard_normal((ns, cols.size)) * 3.0
    else:
        vals = rng.standard_normal((ns, nt)) * np.exp(2.0 * rng.standard_normal(nt))
    if not np.any(vals):
        vals[0, 0] = 1.0
    return DyadicStep2D(level_s, level_t, vals)
