"""Auxiliary-function iterations for nonnegative and least-squares inverse problems.

The package covers divergence functions (:mod:`amprox.distances`), problem
instances (:mod:`amprox.model`), the generic iteration and its monitors
(:mod:`amprox.framework`), concrete solvers (:mod:`amprox.solvers`) and
property diagnostics (:mod:`amprox.diagnostics`).
"""

from .errors import ConfigError, DescentError, DomainError, IterationError, OracleUnavailable, SingularityError
from .framework import IterationTrace, StoppingRule, run_af
from .model import FAMILIES, ProblemInstance
from .report import CheckReport
from .solvers import Solution, SolverConfig, solve

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "CheckReport",
    "ConfigError",
    "DescentError",
    "DomainError",
    "IterationError",
    "IterationTrace",
    "OracleUnavailable",
    "ProblemInstance",
    "SingularityError",
    "Solution",
    "SolverConfig",
    "StoppingRule",
    "run_af",
    "solve",
]
