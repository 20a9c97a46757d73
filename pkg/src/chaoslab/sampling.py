"""Seeded random corpora of coefficients and step functions.

All randomness goes through ``numpy.random.default_rng(seed)`` (PCG64).  The
generator algorithm is part of the reproducibility contract: changing it
changes every pinned regression value.
"""

from __future__ import annotations

import numpy as np

from .dyadic import DyadicStep
from .walsh import ChaosCoeffs

__all__ = ["rng_for", "coefficient_vector", "random_coeffs", "random_step", "random_step_values", "FAMILIES"]

FAMILIES = ("gaussian", "sparse")
SPARSE_DENSITY = 0.25


def rng_for(seed) -> np.random.Generator:
    """Generator for an integer seed or a sequence of integers (a derived stream)."""
    if seed is None:
        seed = 0
    if isinstance(seed, (list, tuple)):
        return np.random.default_rng([int(s) for s in seed])
    return np.random.default_rng(int(seed))


def coefficient_vector(rng: np.random.Generator, n: int, family: str) -> np.ndarray:
    """Gaussian i.i.d. entries, or sparse +-1 entries with density 1/4 (never all zero)."""
    if family == "gaussian":
        return rng.standard_normal(n)
    if family != "sparse":
        raise ValueError(f"unknown coefficient family {family!r}")
    while True:
        mask = rng.random(n) < SPARSE_DENSITY
        if mask.any():
            return np.where(mask, rng.choice([-1.0, 1.0], size=n), 0.0)


def random_coeffs(rng: np.random.Generator, pairs, family: str = "gaussian") -> ChaosCoeffs:
    pairs = list(pairs)
    return ChaosCoeffs.from_pairs(pairs, coefficient_vector(rng, len(pairs), family))


def random_step_values(rng: np.random.Generator, size: int) -> np.ndarray:
    """One of several shapes: gaussian, heavy tailed, sparse, or few distinct levels."""
    kind = rng.integers(4)
    if kind == 0:
        return rng.standard_normal(size)
    if kind == 1:
        return rng.standard_cauchy(size).clip(-1e3, 1e3)
    if kind == 2:
        return np.where(rng.random(size) < 0.1, rng.standard_normal(size) * 5.0, 0.0)
    return rng.integers(-3, 4, size=size).astype(float)


def random_step(rng: np.random.Generator, level: int) -> DyadicStep:
    return DyadicStep(level, random_step_values(rng, 1 << level))
