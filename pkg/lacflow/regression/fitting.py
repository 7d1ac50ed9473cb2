"""Fit the data-driven DC and LAC coefficients from solved AC snapshots."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from lacflow.grid.network import Network
from lacflow.regression.datasets import (
    INTERCEPT,
    DesignMatrix,
    assemble_ddc_dataset,
    assemble_p_dataset,
    assemble_q_dataset,
)
from lacflow.regression.ols import FitResult, ols_fit
from lacflow.solvers.coefficients import ModelCoefficients
from lacflow.solvers.flows import SolvedState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoefficientFit:
    coefficients: ModelCoefficients
    p_fit: FitResult
    q_fit: FitResult
    ddc_fit: FitResult

    @property
    def fits(self) -> tuple[FitResult, FitResult, FitResult]:
        return self.p_fit, self.q_fit, self.ddc_fit


def _slopes(fit: FitResult) -> list[float]:
    return [float(b) for name, b in zip(fit.names, fit.beta) if name != INTERCEPT]


def _intercept(fit: FitResult) -> Optional[float]:
    return fit.coefficient(INTERCEPT) if INTERCEPT in fit.names else None


def fit_model_coefficients(
    network: Network,
    training_solutions: Sequence[SolvedState],
    *,
    case_ids: Optional[Sequence[str]] = None,
    free_intercept: bool = False,
    fit_stats_ref: Optional[str] = None,
) -> CoefficientFit:
    """Run the three regressions and map their slopes onto K_D and K_A1..K_A5."""
    datasets: list[DesignMatrix] = [
        assemble_p_dataset(network, training_solutions, case_ids),
        assemble_q_dataset(network, training_solutions, case_ids),
        assemble_ddc_dataset(network, training_solutions, case_ids),
    ]
    if free_intercept:
        datasets = [d.with_intercept() for d in datasets]
    p_fit, q_fit, ddc_fit = (ols_fit(d) for d in datasets)

    trained_on = tuple(case_ids) if case_ids is not None else (network.name or "case1",)
    provenance: dict[str, Any] = {
        "observations": p_fit.n,
        "r2": {fit.label: fit.r2 for fit in (p_fit, q_fit, ddc_fit)},
        "free_intercept": free_intercept,
    }
    if free_intercept:
        provenance["intercepts"] = {fit.label: _intercept(fit) for fit in (p_fit, q_fit, ddc_fit)}
    coefficients = ModelCoefficients(
        k_d=_slopes(ddc_fit)[0],
        k_a=tuple(_slopes(p_fit) + _slopes(q_fit)),
        trained_on=trained_on,
        fit_stats_ref=fit_stats_ref,
        provenance=provenance,
    )
    logger.info(
        "coefficients fitted",
        extra={"k_d": coefficients.k_d, "k_a": list(coefficients.k_a), "cases": list(trained_on)},
    )
    return CoefficientFit(coefficients=coefficients, p_fit=p_fit, q_fit=q_fit, ddc_fit=ddc_fit)


def _jsonable(values: Any) -> Any:
    if isinstance(values, np.ndarray):
        return [_jsonable(float(v)) for v in values]
    if isinstance(values, float) and not math.isfinite(values):
        return None if math.isnan(values) else ("inf" if values > 0 else "-inf")
    return values


def fit_result_to_dict(fit: FitResult) -> dict[str, Any]:
    """Every FitResult field in JSON-safe form; NaN becomes null, infinities strings."""
    return {
        "label": fit.label,
        "names": list(fit.names),
        "n": fit.n,
        "k": fit.k,
        "has_intercept": fit.has_intercept,
        "beta": _jsonable(fit.beta),
        "stderr": _jsonable(fit.stderr),
        "t_values": _jsonable(fit.t_values),
        "p_values": _jsonable(fit.p_values),
        "ci95_lo": _jsonable(fit.ci95_lo),
        "ci95_hi": _jsonable(fit.ci95_hi),
        "ss_res": fit.ss_res,
        "ms_res": fit.ms_res,
        "r2_uncentered": fit.r2_uncentered,
        "r2_centered": fit.r2_centered,
        "fitted": _jsonable(fit.fitted),
        "residuals": _jsonable(fit.residuals),
        "standardized": _jsonable(fit.standardized),
        "studentized": _jsonable(fit.studentized),
        "hat_diag": _jsonable(fit.hat_diag),
        "vif": None
        if fit.vif is None
        else {
            "names": list(fit.vif.names),
            "values": _jsonable(fit.vif.values),
            "infinite": list(fit.vif.infinite),
        },
        "anova": [
            {
                "name": row.name,
                "df": row.df,
                "sum_sq": row.sum_sq,
                "mean_sq": row.mean_sq,
                "f_value": _jsonable(row.f_value),
                "pr_gt_f": row.pr_gt_f,
            }
            for row in fit.anova
        ],
    }


def coefficient_fit_to_dict(fit: CoefficientFit) -> dict[str, Any]:
    return {
        "coefficients": fit.coefficients.to_dict(),
        "fits": {f.label: fit_result_to_dict(f) for f in fit.fits},
    }
