"""Step functions constant on the dyadic cells of (0, 1].

A :class:`DyadicStep` of level ``n`` stores ``2**n`` values; value ``c``
(0-based) lives on the half-open cell ``(c 2^-n, (c+1) 2^-n]``.  Endpoints are
a null set and are never treated specially.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import PreconditionError

__all__ = [
    "DyadicStep",
    "make_step",
    "constant",
    "indicator",
    "refine",
    "pointwise",
    "integral",
    "rearrangement",
    "equimeasurable",
    "EQUIMEASURABLE_TOL",
]

EQUIMEASURABLE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DyadicStep:
    level: int
    values: np.ndarray

    def __post_init__(self):
        if not isinstance(self.level, (int, np.integer)) or self.level < 0:
            raise PreconditionError(f"level must be a nonnegative integer, got {self.level!r}")
        vals = np.array(self.values, dtype=np.float64).reshape(-1)
        if vals.size != 1 << int(self.level):
            raise PreconditionError(
                f"level {self.level} needs {1 << int(self.level)} values, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise PreconditionError("step values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "level", int(self.level))
        object.__setattr__(self, "values", vals)

    @property
    def size(self) -> int:
        return self.values.size

    def __add__(self, other):
        return pointwise("add", self, other)

    def __sub__(self, other):
        return pointwise("sub", self, other)

    def __mul__(self, other):
        if isinstance(other, DyadicStep):
            return pointwise("mul", self, other)
        return pointwise("scale", self, alpha=float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return pointwise("scale", self, alpha=-1.0)

    def __abs__(self):
        return pointwise("abs", self)

    def same_function(self, other: "DyadicStep", tol: float = 0.0) -> bool:
        """Equality as functions, after refining both to a common level."""
        a, b = _common(self, other)
        return bool(np.all(np.abs(a - b) <= tol))

    def to_dict(self) -> dict:
        return {"level": self.level, "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DyadicStep":
        return cls(int(d["level"]), np.asarray(d["values"], dtype=float))

    def __repr__(self):
        return f"DyadicStep(level={self.level}, values={self.values!r})"


def make_step(level: int, values) -> DyadicStep:
    return DyadicStep(level, values)


def constant(c: float, level: int = 0) -> DyadicStep:
    return DyadicStep(level, np.full(1 << level, float(c)))


def indicator(s: float, level: int) -> DyadicStep:
    """Indicator of (0, s]; ``s`` must be a multiple of ``2**-level``."""
    cells = s * (1 << level)
    if abs(cells - round(cells)) > 1e-12 or not 0 <= s <= 1:
        raise PreconditionError(f"indicator endpoint {s} is not a level-{level} cell endpoint")
    vals = np.zeros(1 << level)
    vals[: int(round(cells))] = 1.0
    return DyadicStep(level, vals)


def _refined_values(x: DyadicStep, target: int) -> np.ndarray:
    if target == x.level:
        return x.values
    return np.repeat(x.values, 1 << (target - x.level))


def refine(x: DyadicStep, target: int) -> DyadicStep:
    if target < x.level:
        raise PreconditionError(
            f"cannot refine level {x.level} down to {target}; use walsh.sigma_k for averaging"
        )
    return DyadicStep(target, _refined_values(x, target))


def _common(x: DyadicStep, y: DyadicStep):
    n = max(x.level, y.level)
    return _refined_values(x, n), _refined_values(y, n)


def pointwise(op: str, x: DyadicStep, y: Optional[DyadicStep] = None, alpha: float = 1.0) -> DyadicStep:
    """Cell-wise ``add``, ``sub``, ``mul``, ``abs`` or ``scale`` (by ``alpha``).

    Binary operands are refined to the finer of the two levels first.
    """
    if op == "abs":
        return DyadicStep(x.level, np.abs(x.values))
    if op == "scale":
        return DyadicStep(x.level, alpha * x.values)
    if op not in ("add", "sub", "mul"):
        raise PreconditionError(f"unknown pointwise op {op!r}")
    if y is None:
        raise PreconditionError(f"{op} needs two operands")
    a, b = _common(x, y)
    level = max(x.level, y.level)
    if op == "add":
        return DyadicStep(level, a + b)
    if op == "sub":
        return DyadicStep(level, a - b)
    return DyadicStep(level, a * b)


def integral(x: DyadicStep) -> float:
    return float(np.sum(x.values) / x.size)


def rearrangement(x: DyadicStep) -> DyadicStep:
    """Non-increasing rearrangement of ``|x|`` at the same level.

    With the half-open cell convention the value at a cell endpoint ``t`` is the
    value on the cell ending at ``t``, i.e. ``x*(c 2^-n) = values[c - 1]``.
    """
    return DyadicStep(x.level, np.sort(np.abs(x.values))[::-1])


def equimeasurable(x: DyadicStep, y: DyadicStep, tol: float = EQUIMEASURABLE_TOL) -> bool:
    """True when ``|x|`` and ``|y|`` have the same distribution (within ``tol``)."""
    a, b = _common(rearrangement(x), rearrangement(y))
    return bool(np.all(np.abs(a - b) <= tol))
