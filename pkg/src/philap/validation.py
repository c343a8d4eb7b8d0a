"""Input validation helpers shared by the estimators and the CLI."""

import numbers

import numpy as np

from .action import ProblemT11, ProblemT12, coerce_state
from .config import ProblemConfig
from .exceptions import InvalidParameterError

__all__ = [
    "check_problem",
    "check_state",
    "check_positive",
    "check_fraction",
    "check_seed",
]


def check_problem(problem):
    """Unwrap a :class:`ProblemConfig` and make sure a problem object remains."""
    if isinstance(problem, ProblemConfig):
        problem = problem.problem
    if not isinstance(problem, (ProblemT11, ProblemT12)):
        raise TypeError(f"expected ProblemT11 or ProblemT12, got {type(problem).__name__}")
    return problem


def check_state(problem, u):
    """Shape-checked :class:`PeriodicState`; rejects non-finite coordinates."""
    u = coerce_state(problem, u)
    if not np.all(np.isfinite(u.flat())):
        raise InvalidParameterError("state contains non-finite coordinates")
    return u


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise InvalidParameterError(f"{name} must be a finite real number, got {value!r}")
    if (strict and value <= 0) or (not strict and value < 0):
        bound = "> 0" if strict else ">= 0"
        raise InvalidParameterError(f"{name} must be {bound}, got {value!r}")
    return float(value)


def check_fraction(value, name):
    """A real number in the open interval (0, 1)."""
    value = check_positive(value, name)
    if value >= 1:
        raise InvalidParameterError(f"{name} must lie in (0, 1), got {value!r}")
    return value


def check_seed(seed):
    if seed is None:
        return 0
    if isinstance(seed, bool) or not isinstance(seed, numbers.Integral) or seed < 0:
        raise InvalidParameterError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed)
