"""Numerics for the Newtonian limit of relativistic kinetic theory.

Modified Bessel functions and Juttner equilibria, relativistic collision
kernels and their Newtonian limits, the linearized collision operator, the
coefficient matrices of the fluid expansion and 1-D Euler solvers.
"""

from . import (
    collision,
    equilibria,
    euler,
    expansion,
    experiments,
    kinematics,
    linop,
    nullspace,
    quadrature,
    specfun,
)
from .errors import (
    AccuracyError,
    BlowUpError,
    ConvergenceError,
    DomainError,
    NumericError,
    RelkinError,
    UsageError,
)

__version__ = "0.1.0"

__all__ = [
    "collision",
    "equilibria",
    "euler",
    "expansion",
    "experiments",
    "kinematics",
    "linop",
    "nullspace",
    "quadrature",
    "specfun",
    "AccuracyError",
    "BlowUpError",
    "ConvergenceError",
    "DomainError",
    "NumericError",
    "RelkinError",
    "UsageError",
]
