"""Regression report tables and table serialization (CSV via pandas, JSON).

Floats are written with ``repr`` precision so a table read back from disk compares
equal, cell for cell, to the one that produced it.
"""

from __future__ import annotations

import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from lacflow.constants import VIF_THRESHOLD
from lacflow.fs import FileSystemAdapter
from lacflow.metrics.tables import ReportTable
from lacflow.regression.fitting import CoefficientFit
from lacflow.regression.ols import FitResult

P_VALUE_COLUMNS = ("Pr(>|t|)", "Pr(>F)")


def coefficient_table(fit: FitResult) -> ReportTable:
    rows = [
        (
            name,
            float(fit.beta[j]),
            float(fit.stderr[j]),
            float(fit.t_values[j]),
            float(fit.p_values[j]),
            float(fit.ci95_lo[j]),
            float(fit.ci95_hi[j]),
        )
        for j, name in enumerate(fit.names)
    ]
    return ReportTable(
        name=f"{fit.label}_coefficients",
        title=f"{fit.label}: coefficient estimates",
        columns=("term", "estimate", "std error", "t value", "Pr(>|t|)", "2.5 %", "97.5 %"),
        rows=rows,
        notes=(
            f"n = {fit.n}, k = {fit.k}, residual df = {fit.df_resid}",
            f"R-squared = {fit.r2:.10g} ({'centered' if fit.has_intercept else 'uncentered'})",
            f"MS_res = {fit.ms_res:.10g}",
        ),
    )


def anova_table(fit: FitResult) -> ReportTable:
    rows = [(r.name, r.df, r.sum_sq, r.mean_sq, r.f_value, r.pr_gt_f) for r in fit.anova]
    return ReportTable(
        name=f"{fit.label}_anova",
        title=f"{fit.label}: sequential analysis of variance",
        columns=("term", "Df", "Sum Sq", "Mean Sq", "F value", "Pr(>F)"),
        rows=rows,
    )


def vif_table(fit: FitResult, threshold: float = VIF_THRESHOLD) -> Optional[ReportTable]:
    """None for single-regressor fits, where VIF does not apply."""
    if fit.vif is None:
        return None
    flagged = set(fit.vif.above(threshold))
    rows = [
        (name, float(value), name in flagged)
        for name, value in zip(fit.vif.names, fit.vif.values)
    ]
    return ReportTable(
        name=f"{fit.label}_vif",
        title=f"{fit.label}: variance inflation factors",
        columns=("term", "VIF", f"VIF >= {threshold:g}"),
        rows=rows,
    )


def _moments(values: np.ndarray) -> tuple[Optional[float], Optional[float]]:
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return None, None
    variance = float(np.var(finite, ddof=1)) if finite.size > 1 else 0.0
    return float(finite.mean()), variance


def residual_summary_table(fit: FitResult) -> ReportTable:
    """Mean and variance of the raw, standardized and R-student residuals."""
    rows = []
    for label, values in (
        ("e", fit.residuals),
        ("d", fit.standardized),
        ("t", fit.studentized),
    ):
        mean, variance = _moments(np.asarray(values, dtype=float))
        rows.append((label, mean, variance))
    return ReportTable(
        name=f"{fit.label}_residuals",
        title=f"{fit.label}: residual summary",
        columns=("residual", "mean", "variance"),
        rows=rows,
    )


def residual_series_table(fit: FitResult) -> ReportTable:
    rows = [
        (
            i + 1,
            float(fit.fitted[i]),
            float(fit.residuals[i]),
            float(fit.standardized[i]),
            float(fit.studentized[i]),
            float(fit.hat_diag[i]),
        )
        for i in range(fit.n)
    ]
    return ReportTable(
        name=f"{fit.label}_residual_series",
        title=f"{fit.label}: residuals against fitted values",
        columns=("observation", "fitted", "e", "d", "t", "h_ii"),
        rows=rows,
    )


def regression_tables(fit: CoefficientFit, *, include_series: bool = False) -> list[ReportTable]:
    """Every regression table for the three fits, in fit order."""
    tables: list[ReportTable] = []
    for result in fit.fits:
        tables.append(coefficient_table(result))
        tables.append(anova_table(result))
        vif = vif_table(result)
        if vif is not None:
            tables.append(vif)
        tables.append(residual_summary_table(result))
        if include_series:
            tables.append(residual_series_table(result))
    return tables


def coefficient_summary_table(fit: CoefficientFit) -> ReportTable:
    coeffs = fit.coefficients
    rows: list[tuple[Any, ...]] = [("K_D", coeffs.k_d)]
    rows += [(f"K_A{j}", k) for j, k in enumerate(coeffs.k_a, start=1)]
    return ReportTable(
        name="coefficients",
        title="Fitted model coefficients",
        columns=("coefficient", "value"),
        rows=rows,
        notes=(f"trained on: {', '.join(coeffs.trained_on)}",),
    )


def _json_cell(value: Any) -> Any:
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return None
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def table_to_dict(table: ReportTable) -> dict[str, Any]:
    return {
        "name": table.name,
        "title": table.title,
        "columns": list(table.columns),
        "rows": [[_json_cell(cell) for cell in row] for row in table.rows],
        "notes": list(table.notes),
    }


def table_to_csv(table: ReportTable) -> str:
    buffer = io.StringIO()
    table.to_frame().to_csv(buffer, index=False, na_rep="", lineterminator="\n")
    return buffer.getvalue()


def write_tables(
    tables: Iterable[ReportTable],
    out_dir: Path,
    formats: Sequence[str],
    *,
    fs: FileSystemAdapter,
    prefix: str = "",
) -> list[Path]:
    """Write each table as ``<prefix><name>.csv`` and/or ``.json``; returns paths written."""
    written: list[Path] = []
    fs.makedirs(out_dir)
    for table in tables:
        stem = f"{prefix}{table.name}"
        if "csv" in formats:
            path = out_dir / f"{stem}.csv"
            fs.write_text(path, table_to_csv(table))
            written.append(path)
        if "json" in formats:
            path = out_dir / f"{stem}.json"
            fs.write_text(path, json.dumps(table_to_dict(table), indent=2) + "\n")
            written.append(path)
    return written


__all__ = [
    "P_VALUE_COLUMNS",
    "coefficient_table",
    "anova_table",
    "vif_table",
    "residual_summary_table",
    "residual_series_table",
    "regression_tables",
    "coefficient_summary_table",
    "table_to_dict",
    "table_to_csv",
    "write_tables",
]
