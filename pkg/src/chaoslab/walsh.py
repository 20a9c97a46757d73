"""Rademacher and Walsh-Paley functions, chaos coefficients, and the operators
acting on order-2 chaos expansions.

Indexing conventions
--------------------
``r_k(t) = sign sin(2^(k-1) pi t)``, so ``r_1 == 1`` and ``r_k`` is constant on
cells of width ``2^(1-k)``.  At level ``n`` the value of ``r_k`` on cell ``c``
(0-based) is ``(-1)**bit(c, n-k+1)`` where ``bit(c, s) = (c >> s) & 1``.

Paley indexing: ``w_0 = 1`` and bit ``b`` of ``n`` contributes the factor
``r_(b+2)``.  The chaos element ``r_i r_j`` is therefore the Walsh function of
index ``2^(j-2)`` when ``i == 1`` and ``2^(i-2) + 2^(j-2)`` when ``i >= 2``.

Chaos pairs are enumerated by increasing Walsh index, which gives the linear
position ``(j-1)(j-2)/2 + i`` for the pair ``(i, j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .dyadic import DyadicStep
from .errors import PreconditionError

__all__ = [
    "ChaosCoeffs",
    "SignPattern",
    "ChaosAnalysis",
    "rademacher",
    "rademacher_values",
    "walsh_paley",
    "pair_index",
    "to_linear",
    "to_pair",
    "pairs_up_to",
    "pair_walsh_index",
    "chaos_matrix",
    "synthesize",
    "fwht",
    "walsh_spectrum",
    "walsh_spectrum_naive",
    "analyze",
    "sigma_k",
    "partial_sum",
    "apply_signs",
]


def _check_pair(i: int, j: int):
    if not (1 <= i < j):
        raise PreconditionError(f"chaos pair must satisfy 1 <= i < j, got ({i}, {j})")


def to_linear(i: int, j: int) -> int:
    _check_pair(i, j)
    return (j - 1) * (j - 2) // 2 + i


def to_pair(m: int) -> tuple[int, int]:
    if m < 1:
        raise PreconditionError(f"linear position must be >= 1, got {m}")
    # smallest j with (j-1)j/2 >= m
    j = math.isqrt(2 * m) + 1
    while (j - 2) * (j - 1) // 2 >= m:
        j -= 1
    while (j - 1) * j // 2 < m:
        j += 1
    return m - (j - 1) * (j - 2) // 2, j


def pair_index(direction: str, arg):
    if direction == "to_linear":
        return to_linear(*arg)
    if direction == "to_pair":
        return to_pair(arg)
    raise PreconditionError(f"direction must be 'to_linear' or 'to_pair', got {direction!r}")


def pairs_up_to(max_index: int) -> list[tuple[int, int]]:
    """All pairs with ``j <= max_index`` in linear order."""
    return [(i, j) for j in range(2, max_index + 1) for i in range(1, j)]


def pair_walsh_index(i: int, j: int) -> int:
    _check_pair(i, j)
    if i == 1:
        return 1 << (j - 2)
    return (1 << (i - 2)) + (1 << (j - 2))


def _min_level(k: int) -> int:
    return max(k - 1, 0)


def rademacher_values(k: int, level: int) -> np.ndarray:
    if k < 1:
        raise PreconditionError(f"Rademacher index must be >= 1, got {k}")
    if level < _min_level(k):
        raise PreconditionError(f"r_{k} needs level >= {_min_level(k)}, got {level}")
    if k == 1:
        return np.ones(1 << level)
    c = np.arange(1 << level)
    return 1.0 - 2.0 * ((c >> (level - k + 1)) & 1)


def rademacher(k: int, level: int) -> DyadicStep:
    return DyadicStep(level, rademacher_values(k, level))


def walsh_paley(n: int, level: int) -> DyadicStep:
    if n < 0 or n >= 1 << level:
        raise PreconditionError(f"Walsh index {n} not representable at level {level}")
    vals = np.ones(1 << level)
    b = 0
    while n >> b:
        if (n >> b) & 1:
            vals = vals * rademacher_values(b + 2, level)
        b += 1
    return DyadicStep(level, vals)


@dataclass(frozen=True, eq=False)
class ChaosCoeffs:
    """Finite family ``a_{i,j}``, ``1 <= i < j``."""

    entries: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), a in dict(self.entries).items():
            i, j = int(i), int(j)
            _check_pair(i, j)
            a = float(a)
            if not math.isfinite(a):
                raise PreconditionError(f"coefficient at ({i}, {j}) is not finite")
            clean[(i, j)] = a
        object.__setattr__(self, "entries", dict(sorted(clean.items(), key=lambda kv: to_linear(*kv[0]))))

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(self.entries)

    @property
    def max_index(self) -> int:
        return max((j for _, j in self.entries), default=1)

    @property
    def min_level(self) -> int:
        return _min_level(self.max_index)

    def __len__(self):
        return len(self.entries)

    def coefficients(self) -> np.ndarray:
        return np.array(list(self.entries.values()), dtype=float)

    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(self.coefficients() ** 2)))

    def to_linear_array(self, n: Optional[int] = None) -> np.ndarray:
        """Dense vector indexed by linear position minus one."""
        last = max((to_linear(*p) for p in self.entries), default=0)
        n = last if n is None else n
        out = np.zeros(n)
        for p, a in self.entries.items():
            m = to_linear(*p)
            if m <= n:
                out[m - 1] = a
        return out

    @classmethod
    def from_linear(cls, values: Iterable[float]) -> "ChaosCoeffs":
        return cls({to_pair(m): a for m, a in enumerate(values, start=1)})

    @classmethod
    def from_pairs(cls, pairs, values) -> "ChaosCoeffs":
        return cls(dict(zip([tuple(p) for p in pairs], values)))

    def scaled(self, alpha: float) -> "ChaosCoeffs":
        return ChaosCoeffs({p: alpha * a for p, a in self.entries.items()})

    def allclose(self, other: "ChaosCoeffs", tol: float = 1e-12) -> bool:
        keys = set(self.entries) | set(other.entries)
        return all(abs(self.entries.get(k, 0.0) - other.entries.get(k, 0.0)) <= tol for k in keys)

    def to_list(self) -> list[dict]:
        return [{"i": i, "j": j, "a": a} for (i, j), a in self.entries.items()]

    @classmethod
    def from_list(cls, items) -> "ChaosCoeffs":
        return cls({(int(d["i"]), int(d["j"])): float(d["a"]) for d in items})

    def __repr__(self):
        return f"ChaosCoeffs({self.entries!r})"


@dataclass(frozen=True, eq=False)
class SignPattern:
    signs: Mapping[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (i, j), s in dict(self.signs).items():
            _check_pair(int(i), int(j))
            if s not in (1, -1):
                raise PreconditionError(f"sign at ({i}, {j}) must be +1 or -1, got {s!r}")
            clean[(int(i), int(j))] = int(s)
        object.__setattr__(self, "signs", dict(sorted(clean.items(), key=lambda kv: to_linear(*kv[0]))))

    def get(self, pair) -> int:
        return self.signs.get(tuple(pair), 1)

    def flipped(self) -> "SignPattern":
        return SignPattern({p: -s for p, s in self.signs.items()})

    @classmethod
    def from_array(cls, pairs, signs) -> "SignPattern":
        return cls({tuple(p): int(s) for p, s in zip(pairs, signs)})

    def to_list(self) -> list[dict]:
        return [{"i": i, "j": j, "s": s} for (i, j), s in self.signs.items()]

    @classmethod
    def from_list(cls, items) -> "SignPattern":
        return cls({(int(d["i"]), int(d["j"])): int(d["s"]) for d in items})

    def __eq__(self, other):
        return isinstance(other, SignPattern) and self.signs == other.signs

    def __repr__(self):
        return f"SignPattern({self.signs!r})"


def chaos_matrix(pairs, level: int) -> np.ndarray:
    """Rows are the values of ``r_i r_j`` for each pair, at ``level``."""
    pairs = [tuple(p) for p in pairs]
    if not pairs:
        return np.zeros((0, 1 << level))
    top = max(j for _, j in pairs)
    if level < _min_level(top):
        raise PreconditionError(f"pairs up to r_{top} need level >= {_min_level(top)}, got {level}")
    rad = {k: rademacher_values(k, level) for k in {i for p in pairs for i in p}}
    return np.stack([rad[i] * rad[j] for i, j in pairs])


def synthesize(c: ChaosCoeffs, level: Optional[int] = None) -> DyadicStep:
    level = c.min_level if level is None else level
    if level < c.min_level:
        raise PreconditionError(f"coefficients up to r_{c.max_index} need level >= {c.min_level}, got {level}")
    if len(c) == 0:
        return DyadicStep(level, np.zeros(1 << level))
    return DyadicStep(level, c.coefficients() @ chaos_matrix(c.pairs, level))


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform (natural order) along the last axis."""
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[-1]
    if n & (n - 1):
        raise PreconditionError(f"transform length must be a power of two, got {n}")
    lead = a.shape[:-1]
    h = 1
    while h < n:
        v = a.reshape(lead + (n // (2 * h), 2, h))
        x, y = v[..., 0, :].copy(), v[..., 1, :]
        v[..., 0, :] += y
        v[..., 1, :] = x - y
        h *= 2
    return a


def _bitrev(level: int) -> np.ndarray:
    idx = np.arange(1 << level)
    out = np.zeros_like(idx)
    for b in range(level):
        out |= ((idx >> b) & 1) << (level - 1 - b)
    return out


def walsh_spectrum(x: DyadicStep) -> np.ndarray:
    """All Paley-ordered coefficients ``integral(x * w_n)`` in O(N log N)."""
    h = fwht(x.values) / x.size
    # bit b of a Paley index selects cell bit level-1-b
    return h[_bitrev(x.level)]


def walsh_spectrum_naive(x: DyadicStep) -> np.ndarray:
    """Quadratic-time reference: explicit inner products with each ``w_n``."""
    return np.array([np.mean(x.values * walsh_paley(n, x.level).values) for n in range(x.size)])


@dataclass(frozen=True)
class ChaosAnalysis:
    coeffs: ChaosCoeffs
    residual: np.ndarray  # Paley spectrum with the chaos positions zeroed


def analyze(x: DyadicStep, tol: float = 1e-13) -> ChaosAnalysis:
    """Split the Walsh spectrum of ``x`` into chaos coefficients and the rest.

    Chaos coefficients of magnitude below ``tol * max(1, max|spec|)`` are dropped.
    """
    spec = walsh_spectrum(x)
    residual = spec.copy()
    cut = tol * max(1.0, float(np.max(np.abs(spec))) if spec.size else 1.0)
    entries = {}
    for j in range(2, x.level + 2):
        for i in range(1, j):
            n = pair_walsh_index(i, j)
            residual[n] = 0.0
            if abs(spec[n]) > cut:
                entries[(i, j)] = spec[n]
    return ChaosAnalysis(ChaosCoeffs(entries), residual)


def sigma_k(x: DyadicStep, k: int) -> DyadicStep:
    """Averaging over the dyadic intervals of length ``2^-k``; level is kept.

    Equals the Walsh partial sum over Paley indices ``0 .. 2^k - 1``.
    """
    if k < 0:
        raise PreconditionError(f"k must be nonnegative, got {k}")
    if k >= x.level:
        return x
    means = x.values.reshape(1 << k, -1).mean(axis=1)
    return DyadicStep(x.level, np.repeat(means, 1 << (x.level - k)))


def partial_sum(c: ChaosCoeffs, m: int, level: Optional[int] = None) -> DyadicStep:
    """Sum of the terms of ``c`` at linear positions ``1..m``."""
    if m < 0:
        raise PreconditionError(f"m must be nonnegative, got {m}")
    level = c.min_level if level is None else level
    head = ChaosCoeffs({p: a for p, a in c.entries.items() if to_linear(*p) <= m})
    return synthesize(head, level)


def apply_signs(c: ChaosCoeffs, theta: SignPattern) -> ChaosCoeffs:
    return ChaosCoeffs({p: theta.get(p) * a for p, a in c.entries.items()})
