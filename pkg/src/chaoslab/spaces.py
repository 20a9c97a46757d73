"""Symmetric function norms on dyadic step functions.

Families: ``L_p`` (``1 <= p <= inf``), Orlicz spaces with the Luxemburg norm,
and the Marcinkiewicz spaces ``M(phi_eps)`` with
``phi_eps(t) = t * log2(2/t)**(1/2 - eps)``.

Every norm here depends only on the decreasing rearrangement, so all of them
also accept a whole batch of functions as the rows of a matrix (``norms``).
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import optimize, special

from .dyadic import DyadicStep
from .errors import ConvergenceError, PreconditionError

__all__ = [
    "NFunction",
    "EXP",
    "EXP_SQUARE",
    "NFUNCTIONS",
    "NormSpec",
    "lp_norm",
    "nfunction_conjugate",
    "conjugate_nfunction",
    "nfunction_inverse",
    "orlicz_norm",
    "orlicz_norms",
    "phi_weight",
    "marcinkiewicz_norm",
    "marcinkiewicz_norms",
    "psi_quasinorm",
    "marcinkiewicz_psi_constant",
    "norm",
    "norms",
]

log = logging.getLogger(__name__)

ORLICZ_RTOL = 1e-10
ORLICZ_MAX_ITER = 200
CONJUGATE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class NFunction:
    """Convex ``A`` on ``[0, inf)`` with ``A(u)/u -> 0`` at 0 and ``u/A(u) -> 0`` at inf.

    ``eval`` must be vectorised and may return ``inf`` on overflow.
    """

    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    conjugate: Optional[Callable[[np.ndarray], np.ndarray]] = None
    inverse_one: Optional[float] = None  # A^{-1}(1)

    def __call__(self, u):
        with np.errstate(over="ignore"):
            return self.eval(np.asarray(u, dtype=float))

    def __repr__(self):
        return f"NFunction({self.name!r})"


def _exp_conjugate(u):
    u = np.asarray(u, dtype=float)
    safe = np.maximum(u, 1.0)
    return np.where(u <= 1.0, 0.0, safe * np.log(safe) - safe + 1.0)


EXP = NFunction("M", np.expm1, conjugate=_exp_conjugate, inverse_one=math.log(2.0))
EXP_SQUARE = NFunction("N", lambda u: np.expm1(u * u), inverse_one=math.sqrt(math.log(2.0)))

NFUNCTIONS = {"M": EXP, "exp": EXP, "N": EXP_SQUARE, "exp2": EXP_SQUARE}


def _scalar_sup(fun, u: float) -> float:
    """``sup_{v >= 0} (u v - fun(v))`` for convex ``fun`` with ``fun(0) = 0``."""

    def g(v):
        with np.errstate(over="ignore", invalid="ignore"):
            val = u * v - float(fun(np.asarray(v)))
        return val if math.isfinite(val) else -math.inf

    b = 1.0
    while g(b) >= g(b / 2):
        b *= 2.0
        if b > 1e300:
            raise ConvergenceError(f"conjugate diverges at u={u}")
    res = optimize.minimize_scalar(lambda v: -g(v), bounds=(0.0, b), method="bounded",
                                   options={"xatol": 1e-14 * b, "maxiter": 500})
    return max(0.0, -float(res.fun), g(b))


def nfunction_conjugate(A: NFunction, u, numeric: bool = False):
    """Legendre conjugate ``A*(u) = sup_{v >= 0} (u v - A(v))``.

    Uses ``A.conjugate`` when present unless ``numeric`` is set; otherwise a
    bounded 1-D maximisation of the concave map ``v -> u v - A(v)``.
    """
    arr = np.asarray(u, dtype=float)
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise PreconditionError("conjugate argument must be finite and >= 0")
    if A.conjugate is not None and not numeric:
        out = np.asarray(A.conjugate(arr), dtype=float)
    else:
        out = np.vectorize(lambda w: _scalar_sup(A, float(w)) if w > 0 else 0.0)(arr)
    return float(out) if out.ndim == 0 else out


def conjugate_nfunction(A: NFunction, numeric: bool = False) -> NFunction:
    return NFunction(A.name + "*", lambda u: np.asarray(nfunction_conjugate(A, u, numeric=numeric)))


def nfunction_inverse(A: NFunction, y: float = 1.0) -> float:
    """Solve ``A(u) = y`` by bisection."""
    if y == 1.0 and A.inverse_one is not None:
        return A.inverse_one
    lo, hi = 0.0, 1.0
    while A(hi) < y:
        lo, hi = hi, hi * 2.0
    for _ in range(ORLICZ_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if A(mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return hi


def lp_norm(x: DyadicStep, p: float) -> float:
    return float(_lp_rows(x.values[None, :], p)[0])


def _lp_rows(v: np.ndarray, p: float) -> np.ndarray:
    if not p >= 1:
        raise PreconditionError(f"L_p needs p >= 1, got {p}")
    a = np.abs(v)
    if math.isinf(p):
        return a.max(axis=1)
    if p == 1:
        return a.mean(axis=1)
    # scale first so large p (and extreme magnitudes) neither overflow nor underflow
    m = a.max(axis=1)
    safe = np.where(m > 0, m, 1.0)
    return m * np.mean((a / safe[:, None]) ** p, axis=1) ** (1.0 / p)


def orlicz_norms(v: np.ndarray, A: NFunction) -> np.ndarray:
    """Luxemburg norms of the rows of ``v`` (cells of equal measure)."""
    a = np.abs(np.atleast_2d(np.asarray(v, dtype=float)))
    top = a.max(axis=1)
    out = np.zeros(a.shape[0])
    live = top > 0
    if not np.any(live):
        return out
    # the Luxemburg norm is homogeneous: solve for rows scaled to max 1
    scale = top[live]
    a = a[live] / scale[:, None]
    # F(hi) <= A(A^{-1}(1)) = 1 because every entry / hi <= A^{-1}(1)
    hi = np.full(a.shape[0], 1.0 / nfunction_inverse(A))
    lo = hi * 2.0 ** -60

    def F(lam):
        with np.errstate(over="ignore"):
            return np.mean(A(a / lam[:, None]), axis=1)

    for _ in range(ORLICZ_MAX_ITER):
        if np.all(hi / lo - 1.0 <= 1e-3 * ORLICZ_RTOL):
            break
        mid = np.sqrt(lo * hi)
        above = F(mid) > 1.0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    else:
        raise ConvergenceError("Luxemburg bisection did not converge in 200 iterations")
    out[live] = hi * scale
    return out


def orlicz_norm(x: DyadicStep, A: NFunction) -> float:
    return float(orlicz_norms(x.values[None, :], A)[0])


def _check_eps(eps: float):
    if not -0.5 <= eps <= 0.5:
        raise PreconditionError(f"Marcinkiewicz parameter must lie in [-1/2, 1/2], got {eps}")


def phi_weight(eps: float, t):
    _check_eps(eps)
    t = np.asarray(t, dtype=float)
    if np.any((t <= 0) | (t > 1)):
        raise PreconditionError("phi_eps is defined for 0 < t <= 1")
    out = t * np.log2(2.0 / t) ** (0.5 - eps)
    return float(out) if out.ndim == 0 else out


def _endpoints(level: int) -> np.ndarray:
    n = 1 << level
    return np.arange(1, n + 1) / n


def marcinkiewicz_norms(v: np.ndarray, level: int, eps: float) -> np.ndarray:
    """``sup_t (1/phi_eps(t)) * integral_0^t x*`` for each row of ``v``.

    On a run where ``x*`` is constant the ratio is quasi-convex in ``t``
    (substitute ``s = ln(2/t)``; the derivative's sign follows an increasing
    function of ``s``), so the supremum is attained at a cell endpoint and the
    endpoint evaluation below is exact.
    """
    _check_eps(eps)
    v = np.atleast_2d(np.asarray(v, dtype=float))
    xs = -np.sort(-np.abs(v), axis=1)
    prim = np.cumsum(xs, axis=1) / v.shape[1]
    return np.max(prim / phi_weight(eps, _endpoints(level)), axis=1)


def marcinkiewicz_norm(x: DyadicStep, eps: float) -> float:
    return float(marcinkiewicz_norms(x.values[None, :], x.level, eps)[0])


def _psi_rows(v: np.ndarray, level: int, eps: float) -> np.ndarray:
    _check_eps(eps)
    xs = -np.sort(-np.abs(np.atleast_2d(v)), axis=1)
    t = _endpoints(level)
    # x* is constant per cell and the weight increases in t: right endpoints suffice
    return np.max(xs * np.log2(2.0 / t) ** (eps - 0.5), axis=1)


def psi_quasinorm(x: DyadicStep, eps: float) -> float:
    """``sup_t x*(t) * t / phi_eps(t) = sup_t x*(t) * log2(2/t)**(eps - 1/2)``."""
    return float(_psi_rows(x.values[None, :], x.level, eps)[0])


def _psi_constant_ratio(w, alpha):
    # (1/phi(t)) * integral_0^t log2(2/s)**alpha ds with w = ln(2/t)
    if alpha == 0:
        return np.ones_like(np.asarray(w, dtype=float))
    return np.exp(w) * special.gammaincc(alpha + 1.0, w) * special.gamma(alpha + 1.0) / w ** alpha


@functools.lru_cache(maxsize=None)
def marcinkiewicz_psi_constant(eps: float) -> float:
    """Smallest ``C`` with ``||x||_{M(phi_eps)} <= C * psi_quasinorm(x, eps)``.

    ``C = sup_t (1/phi_eps(t)) * integral_0^t phi_eps(s)/s ds``; with
    ``w = ln(2/t)`` the ratio is ``e^w Gamma(alpha+1, w) / w^alpha``.
    """
    _check_eps(eps)
    alpha = 0.5 - eps
    w = np.concatenate([np.linspace(math.log(2.0), 5.0, 2000), np.geomspace(5.0, 600.0, 2000)])
    r = _psi_constant_ratio(w, alpha)
    i = int(np.argmax(r))
    lo, hi = w[max(i - 1, 0)], w[min(i + 1, w.size - 1)]
    best = float(r[i])
    if hi > lo:
        res = optimize.minimize_scalar(lambda s: -float(_psi_constant_ratio(s, alpha)), bounds=(lo, hi),
                                       method="bounded", options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    log.info("Marcinkiewicz sup-form constant for eps=%g: %.12g", eps, best)
    return best


@dataclass(frozen=True, eq=False)
class NormSpec:
    tag: str
    p: Optional[float] = None
    nfunction: Optional[NFunction] = None
    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.tag == "Lp":
            if self.p is None or not self.p >= 1:
                raise PreconditionError(f"L_p needs p >= 1, got {self.p}")
        elif self.tag == "Orlicz":
            if self.nfunction is None:
                raise PreconditionError("Orlicz spec needs an N-function")
        elif self.tag == "Marcinkiewicz":
            if self.epsilon is None:
                raise PreconditionError("Marcinkiewicz spec needs epsilon")
            _check_eps(self.epsilon)
        elif self.tag != "Sup":
            raise PreconditionError(f"unknown norm tag {self.tag!r}")

    @classmethod
    def lp(cls, p: float) -> "NormSpec":
        return cls("Sup") if math.isinf(p) else cls("Lp", p=float(p))

    @classmethod
    def sup(cls) -> "NormSpec":
        return cls("Sup")

    @classmethod
    def orlicz(cls, A: NFunction | str) -> "NormSpec":
        if isinstance(A, str):
            if A not in NFUNCTIONS:
                raise PreconditionError(f"unknown N-function {A!r}; known: {sorted(NFUNCTIONS)}")
            A = NFUNCTIONS[A]
        return cls("Orlicz", nfunction=A)

    @classmethod
    def marcinkiewicz(cls, eps: float) -> "NormSpec":
        return cls("Marcinkiewicz", epsilon=float(eps))

    @property
    def label(self) -> str:
        if self.tag == "Lp":
            return f"L{self.p:g}"
        if self.tag == "Sup":
            return "Linf"
        if self.tag == "Orlicz":
            return f"L_{self.nfunction.name}"
        return f"M(phi_{self.epsilon:g})"

    def to_dict(self) -> dict:
        d = {"tag": self.tag}
        if self.tag == "Lp":
            d["p"] = self.p
        elif self.tag == "Orlicz":
            d["nfunction"] = self.nfunction.name
        elif self.tag == "Marcinkiewicz":
            d["epsilon"] = self.epsilon
        return d

    @classmethod
    def from_dict(cls, d) -> "NormSpec":
        if isinstance(d, NormSpec):
            return d
        if isinstance(d, str):
            return cls.parse(d)
        tag = d.get("tag")
        if tag == "Lp":
            return cls.lp(float(d["p"]))
        if tag == "Sup":
            return cls.sup()
        if tag == "Orlicz":
            return cls.orlicz(d["nfunction"])
        if tag == "Marcinkiewicz":
            return cls.marcinkiewicz(float(d["epsilon"]))
        raise PreconditionError(f"unknown norm tag {tag!r}")

    @classmethod
    def parse(cls, text: str) -> "NormSpec":
        """Short forms: ``L1``, ``L2.5``, ``Linf``, ``L_M``, ``L_N``, ``M0.2``."""
        s = text.strip()
        if s in ("Linf", "sup", "Sup"):
            return cls.sup()
        if s.startswith("L_"):
            return cls.orlicz(s[2:])
        if s.startswith("L"):
            try:
                return cls.lp(float(s[1:]))
            except ValueError:
                pass
        if s.startswith("M"):
            try:
                return cls.marcinkiewicz(float(s[1:]))
            except ValueError:
                pass
        raise PreconditionError(f"cannot parse norm spec {text!r}")

    def __eq__(self, other):
        return isinstance(other, NormSpec) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash(tuple(sorted(self.to_dict().items())))

    def __repr__(self):
        return f"NormSpec({self.label})"


def norms(v: np.ndarray, level: int, spec: NormSpec) -> np.ndarray:
    """Norms of every row of ``v`` (each row a level-``level`` step function)."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if v.shape[1] != 1 << level:
        raise PreconditionError(f"rows must have {1 << level} cells, got {v.shape[1]}")
    if spec.tag == "Lp":
        return _lp_rows(v, spec.p)
    if spec.tag == "Sup":
        return np.abs(v).max(axis=1)
    if spec.tag == "Orlicz":
        return orlicz_norms(v, spec.nfunction)
    return marcinkiewicz_norms(v, level, spec.epsilon)


def norm(x: DyadicStep, spec: NormSpec) -> float:
    return float(norms(x.values[None, :], x.level, spec)[0])
