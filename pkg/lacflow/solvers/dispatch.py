"""Solve a network with any model by name."""

from __future__ import annotations

from typing import Optional, Union

from lacflow.constants import AC_MODEL, DATA_DRIVEN_MODELS, DEFAULT_REFINE_PASSES, DEFAULT_REFINE_TOL
from lacflow.exceptions import CoefficientsRequired
from lacflow.grid.network import Network
from lacflow.solvers.ac import AcOptions, AcSolution, solve_ac
from lacflow.solvers.coefficients import ModelCoefficients
from lacflow.solvers.linear import LinearSolution, solve_dc_family, solve_lac_family

Solution = Union[AcSolution, LinearSolution]


def solve_model(
    network: Network,
    model: str,
    *,
    coeffs: Optional[ModelCoefficients] = None,
    ac_options: Optional[AcOptions] = None,
    refine_tol: float = DEFAULT_REFINE_TOL,
    refine_passes: int = DEFAULT_REFINE_PASSES,
) -> Solution:
    """Dispatch to the AC solver or a linear model.

    ``ddc`` and ``dlac`` take their coefficients from ``coeffs``; ``dc`` and ``lac`` ignore it.

    Raises:
        CoefficientsRequired: a data-driven model without coefficients
        ValueError: unknown model name
    """
    if model in DATA_DRIVEN_MODELS and coeffs is None:
        raise CoefficientsRequired(f"coefficients required for model {model}")
    if model == AC_MODEL:
        return solve_ac(network, ac_options)
    if model == "dc":
        return solve_dc_family(
            network, 1.0, refine_tol=refine_tol, refine_passes=refine_passes, model="dc"
        )
    if model == "ddc":
        return solve_dc_family(
            network, coeffs.k_d, refine_tol=refine_tol, refine_passes=refine_passes, model="ddc"
        )
    if model == "lac":
        return solve_lac_family(
            network, None, refine_tol=refine_tol, refine_passes=refine_passes, model="lac"
        )
    if model == "dlac":
        return solve_lac_family(
            network, coeffs, refine_tol=refine_tol, refine_passes=refine_passes, model="dlac"
        )
    raise ValueError(f"unknown model {model!r}")


__all__ = ["Solution", "solve_model"]
