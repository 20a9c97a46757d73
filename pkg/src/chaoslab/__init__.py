"""Order-2 Rademacher chaos in symmetric function spaces on dyadic step functions."""

from .dyadic import DyadicStep, constant, equimeasurable, indicator, integral, make_step, rearrangement, refine
from .errors import ChaosLabError, ConvergenceError, PreconditionError
from .spaces import EXP, EXP_SQUARE, NFunction, NormSpec, norm, norms
from .walsh import ChaosCoeffs, SignPattern, analyze, apply_signs, partial_sum, sigma_k, synthesize

__version__ = "0.1.0"

__all__ = [
    "ChaosCoeffs",
    "ChaosLabError",
    "ConvergenceError",
    "DyadicStep",
    "EXP",
    "EXP_SQUARE",
    "NFunction",
    "NormSpec",
    "PreconditionError",
    "SignPattern",
    "analyze",
    "apply_signs",
    "constant",
    "equimeasurable",
    "indicator",
    "integral",
    "make_step",
    "norm",
    "norms",
    "partial_sum",
    "rearrangement",
    "refine",
    "sigma_k",
    "synthesize",
    "__version__",
]
