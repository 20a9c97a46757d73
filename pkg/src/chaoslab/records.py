"""Check and verification-record types shared by the constructions and the runner."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass
class Check:
    """A single inequality ``lhs <relation> rhs`` with absolute tolerance ``tol``.

    ``margin`` is signed so that ``margin >= -tol`` means the check passes.
    """

    name: str
    lhs: float
    rhs: float
    relation: str = ">="
    tol: float = 0.0
    anchor: str = ""
    t: Optional[float] = None

    @property
    def margin(self) -> float:
        if self.relation in (">=", ">"):
            return self.lhs - self.rhs
        if self.relation == "<=":
            return self.rhs - self.lhs
        if self.relation == "==":
            return -abs(self.lhs - self.rhs)
        raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def passed(self) -> bool:
        m = self.margin
        if self.relation == ">":
            return math.isfinite(m) and m > 0
        return math.isfinite(m) and m >= -self.tol

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "paper_anchor": self.anchor,
            "relation": self.relation,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "tol": self.tol,
            "pass": self.passed,
        }
        if self.t is not None:
            d["t"] = self.t
        return d


@dataclass
class VerificationRecord:
    construction: str
    parameters: dict
    checkpoints: list = field(default_factory=list)
    witnessed_constant: Optional[float] = None
    seed: Optional[int] = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checkpoints)

    def failures(self) -> list:
        return [c for c in self.checkpoints if not c.passed]

    def add(self, *args, **kw) -> Check:
        c = Check(*args, **kw)
        self.checkpoints.append(c)
        return c

    def to_dict(self) -> dict:
        return {
            "construction": self.construction,
            "parameters": _plain(self.parameters),
            "checkpoints": [c.to_dict() for c in self.checkpoints],
            "witnessed_constant": self.witnessed_constant,
            "seed": self.seed,
            "details": _plain(self.details),
            "pass": self.passed,
        }


def _plain(obj: Any):
    """Best-effort conversion of numpy scalars, tuples and library objects to JSON types."""
    import numpy as np

    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    if hasattr(obj, "to_list"):
        return obj.to_list()
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


plain = _plain
