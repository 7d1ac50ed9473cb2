"""Power flow solvers: the AC reference and the linear model family."""

from lacflow.solvers.ac import AcOptions, AcSolution, solve_ac
from lacflow.solvers.coefficients import ModelCoefficients
from lacflow.solvers.flows import BranchFlows
from lacflow.solvers.linear import LinearSolution, solve_dc_family, solve_lac_family

__all__ = [
    "AcOptions",
    "AcSolution",
    "solve_ac",
    "BranchFlows",
    "ModelCoefficients",
    "LinearSolution",
    "solve_dc_family",
    "solve_lac_family",
]
