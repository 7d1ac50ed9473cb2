"""Tail probabilities and quantiles for the F and Student-t distributions."""

from __future__ import annotations

import math

from scipy import special, stats

from lacflow.constants import P_VALUE_FLOOR
from lacflow.exceptions import NumericalError


def _finite(value: float, what: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise NumericalError(f"{what} evaluated to a non-finite value")
    return value


def f_survival(statistic: float, df1: float, df2: float) -> float:
    """P(F > statistic) for an F(df1, df2) variable."""
    if df1 < 1 or df2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if statistic <= 0:
        return 1.0
    if math.isinf(statistic):
        return 0.0
    x = df2 / (df2 + df1 * statistic)
    return _finite(special.betainc(df2 / 2.0, df1 / 2.0, x), "F tail probability")


def t_survival(statistic: float, df: float) -> float:
    """One-sided P(T > statistic) for a Student-t variable."""
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if math.isinf(statistic):
        return 0.0 if statistic > 0 else 1.0
    half = 0.5 * _finite(
        special.betainc(df / 2.0, 0.5, df / (df + statistic * statistic)), "t tail probability"
    )
    return half if statistic >= 0 else 1.0 - half


def t_quantile(p: float, df: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if df < 1:
        raise ValueError("degrees of freedom must be >= 1")
    return _finite(stats.t.ppf(p, df), "t quantile")


def format_p_value(p: float | None) -> str:
    """Render a p-value the way statistical summaries do, flooring at machine epsilon."""
    if p is None or math.isnan(p):
        return ""
    if p < P_VALUE_FLOOR:
        return f"< {P_VALUE_FLOOR:.1e}"
    return f"{p:.4g}"
