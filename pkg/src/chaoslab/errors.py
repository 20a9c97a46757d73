"""Exception types shared by the library and the command line runner."""


class ChaosLabError(Exception):
    """Base class for all library errors."""


class PreconditionError(ChaosLabError, ValueError):
    """An argument violates the documented precondition of an operation."""


class ConvergenceError(ChaosLabError, RuntimeError):
    """An iterative solver did not reach its tolerance."""
