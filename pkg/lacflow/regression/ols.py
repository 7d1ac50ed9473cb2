"""Ordinary least squares with the full diagnostic suite.

Coefficients, leverages and sequential sums of squares all come from one thin QR
factorization of the design matrix; the normal equations are never formed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from lacflow.constants import COLLINEAR_TOL, EXACT_FIT_RATIO
from lacflow.exceptions import NotApplicable, RankDeficient, RegressionError
from lacflow.regression.datasets import INTERCEPT, DesignMatrix
from lacflow.regression.distributions import f_survival, t_quantile, t_survival

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnovaRow:
    name: str
    df: int
    sum_sq: float
    mean_sq: float
    f_value: Optional[float] = None
    pr_gt_f: Optional[float] = None


@dataclass(frozen=True)
class VifResult:
    """Variance inflation factor per regressor; ``infinite`` names perfectly collinear ones."""

    names: tuple[str, ...]
    values: np.ndarray
    infinite: tuple[str, ...] = ()

    def above(self, threshold: float) -> tuple[str, ...]:
        return tuple(n for n, v in zip(self.names, self.values) if v >= threshold)


@dataclass(frozen=True)
class FitResult:
    label: str
    names: tuple[str, ...]
    beta: np.ndarray
    stderr: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    ci95_lo: np.ndarray
    ci95_hi: np.ndarray
    ss_res: float
    ms_res: float
    r2_uncentered: float
    r2_centered: float
    fitted: np.ndarray
    residuals: np.ndarray
    standardized: np.ndarray
    studentized: np.ndarray
    hat_diag: np.ndarray
    vif: Optional[VifResult]
    anova: tuple[AnovaRow, ...]
    n: int
    k: int
    has_intercept: bool = False

    @property
    def df_resid(self) -> int:
        return self.n - self.k

    @property
    def r2(self) -> float:
        """Centered R-squared with an intercept, uncentered without."""
        return self.r2_centered if self.has_intercept else self.r2_uncentered

    def coefficient(self, name: str) -> float:
        return float(self.beta[self.names.index(name)])


@dataclass(frozen=True)
class _Decomposition:
    q: np.ndarray
    r: np.ndarray
    qty: np.ndarray
    beta: np.ndarray
    residuals: np.ndarray
    response: np.ndarray


def _decompose(x: np.ndarray, y: np.ndarray, names: Sequence[str]) -> _Decomposition:
    n, k = x.shape
    q, r = np.linalg.qr(x, mode="reduced")
    diag = np.abs(np.diag(r))
    scale = float(diag.max()) if diag.size else 0.0
    tol = max(n, k) * np.finfo(float).eps * scale
    bad = np.flatnonzero(diag <= tol)
    if bad.size:
        raise RankDeficient(names[int(bad[0])])
    qty = q.T @ y
    beta = solve_triangular(r, qty)
    return _Decomposition(q=q, r=r, qty=qty, beta=beta, residuals=y - x @ beta, response=y)


def _check_shape(d: DesignMatrix) -> None:
    if d.k < 1:
        raise RegressionError("design matrix has no columns")
    # Studentized residuals use n - k - 1 degrees of freedom.
    if d.n < d.k + 2:
        raise RegressionError(f"need at least {d.k + 2} observations for {d.k} regressors, got {d.n}")


def _anova_rows(
    d: DesignMatrix, dec: _Decomposition, ss_res: float, ms_res: float
) -> tuple[AnovaRow, ...]:
    df_resid = d.n - d.k
    total = float(dec.response @ dec.response)
    rows = []
    for j, name in enumerate(d.names):
        if name == INTERCEPT:
            continue
        ss = float(dec.qty[j] ** 2)
        if ss <= EXACT_FIT_RATIO * total:
            f_value, p = 0.0, 1.0
        elif ms_res > 0:
            f_value = ss / ms_res
            p = f_survival(f_value, 1, df_resid)
        else:
            f_value, p = math.inf, 0.0
        rows.append(AnovaRow(name, 1, ss, ss, f_value, p))
    rows.append(AnovaRow("Residuals", df_resid, ss_res, ms_res))
    return tuple(rows)


def anova_sequential(d: DesignMatrix) -> tuple[AnovaRow, ...]:
    """Type-I sums of squares in column order, followed by the residual row."""
    _check_shape(d)
    dec = _decompose(d.x, d.response, d.names)
    ss_res = float(dec.residuals @ dec.residuals)
    return _anova_rows(d, dec, ss_res, ss_res / (d.n - d.k))


def variance_inflation_factors(
    x: np.ndarray, names: Optional[Sequence[str]] = None
) -> VifResult:
    """VIF of each column regressed on the others plus an intercept.

    Raises:
        NotApplicable: fewer than two regressors
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    n, k = x.shape
    names = tuple(names) if names is not None else tuple(f"x{j + 1}" for j in range(k))
    if k < 2:
        raise NotApplicable("VIF does not apply to a model with a single regressor")
    values = np.empty(k)
    infinite = []
    for j in range(k):
        target = x[:, j]
        others = np.column_stack([np.ones(n), np.delete(x, j, axis=1)])
        coef, *_ = np.linalg.lstsq(others, target, rcond=None)
        resid = target - others @ coef
        centered = target - target.mean()
        ss_tot = float(centered @ centered)
        ss_res = float(resid @ resid)
        unexplained = ss_res / ss_tot if ss_tot > 0 else 0.0
        if unexplained <= COLLINEAR_TOL:
            values[j] = math.inf
            infinite.append(names[j])
        else:
            values[j] = 1.0 / min(unexplained, 1.0)
    if infinite:
        logger.warning("perfectly collinear regressors", extra={"columns": infinite})
    return VifResult(names=names, values=values, infinite=tuple(infinite))


def _r2(ss_res: float, ss_tot: float, exact: bool) -> float:
    if exact:
        return 1.0
    if ss_tot <= 0:
        return 0.0
    return float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))


def ols_fit(d: DesignMatrix) -> FitResult:
    """Least squares fit of ``d.response`` on ``d.x`` with residual diagnostics.

    Raises:
        RankDeficient: naming the first column that is linearly dependent on earlier ones
        RegressionError: too few observations
    """
    _check_shape(d)
    n, k = d.n, d.k
    dec = _decompose(d.x, d.response, d.names)
    y, e = dec.response, dec.residuals
    df_resid = n - k
    ss_res = float(e @ e)
    ms_res = ss_res / df_resid
    ss_uncentered = float(y @ y)
    ss_centered = float(np.sum((y - y.mean()) ** 2))
    exact = ss_res <= EXACT_FIT_RATIO * ss_uncentered

    hat = np.clip(np.sum(dec.q * dec.q, axis=1), 0.0, 1.0)
    r_inv = solve_triangular(dec.r, np.eye(k))
    stderr = np.sqrt(ms_res * np.sum(r_inv * r_inv, axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = dec.beta / stderr
    p_values = np.array(
        [2.0 * t_survival(abs(t), df_resid) if not math.isnan(t) else math.nan for t in t_values]
    )
    half_width = t_quantile(0.975, df_resid) * stderr

    if exact:
        standardized = np.zeros(n)
        studentized = np.zeros(n)
    else:
        standardized = e / math.sqrt(ms_res)
        one_minus_h = 1.0 - hat
        with np.errstate(divide="ignore", invalid="ignore"):
            s2_i = (df_resid * ms_res - e * e / one_minus_h) / (df_resid - 1)
            studentized = e / np.sqrt(s2_i * one_minus_h)
        studentized[one_minus_h <= 1e-12] = math.nan

    vif = None
    regressors = [j for j, name in enumerate(d.names) if name != INTERCEPT]
    if len(regressors) >= 2:
        vif = variance_inflation_factors(d.x[:, regressors], [d.names[j] for j in regressors])

    result = FitResult(
        label=d.label,
        names=d.names,
        beta=dec.beta,
        stderr=stderr,
        t_values=t_values,
        p_values=p_values,
        ci95_lo=dec.beta - half_width,
        ci95_hi=dec.beta + half_width,
        ss_res=ss_res,
        ms_res=ms_res,
        r2_uncentered=_r2(ss_res, ss_uncentered, exact),
        r2_centered=_r2(ss_res, ss_centered, exact),
        fitted=y - e,
        residuals=e,
        standardized=standardized,
        studentized=studentized,
        hat_diag=hat,
        vif=vif,
        anova=_anova_rows(d, dec, ss_res, ms_res),
        n=n,
        k=k,
        has_intercept=d.has_intercept,
    )
    logger.info(
        "OLS fit",
        extra={"dataset": d.label, "n": n, "k": k, "r2": result.r2, "beta": dec.beta.tolist()},
    )
    return result
