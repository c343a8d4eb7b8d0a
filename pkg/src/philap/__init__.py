"""Periodic solutions of (phi1, phi2)-Laplacian difference systems.

Exact action functionals and gradients, sample-scale assumption checkers,
multi-start deflated critical-point search and estimators for the
three-critical-point quantities.
"""

__version__ = "0.1.0"

from .action import ProblemT11, ProblemT12, action_gradient, action_value, component_values, pairing
from .config import builtin, dump_config, load_config
from .exceptions import ConfigError, ConvergenceError, DimensionMismatchError, InvalidParameterError
from .nonlinearity import NonlinearitySpec
from .periodic import PeriodicState, WeightSequence, forward_difference, norm
from .potentials import PotentialSpec
from .residual import system_residual
from .ricceri import RicceriEstimator, example51_oracle, ricceri_report
from .solve import CriticalPointFinder, SolverConfig, find_critical_points
from .verify import verify_problem

__all__ = [
    "ProblemT11",
    "ProblemT12",
    "PeriodicState",
    "WeightSequence",
    "PotentialSpec",
    "NonlinearitySpec",
    "SolverConfig",
    "CriticalPointFinder",
    "RicceriEstimator",
    "action_value",
    "action_gradient",
    "component_values",
    "pairing",
    "system_residual",
    "forward_difference",
    "norm",
    "find_critical_points",
    "ricceri_report",
    "example51_oracle",
    "verify_problem",
    "builtin",
    "load_config",
    "dump_config",
    "ConfigError",
    "ConvergenceError",
    "DimensionMismatchError",
    "InvalidParameterError",
]
