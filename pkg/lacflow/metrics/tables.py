"""Comparison tables of linear models against the AC reference.

Tables are views over solutions: every cell is one call to a primitive in
``lacflow.metrics.errors``. Cells that cannot be computed (empty filter, zero baseline)
hold None.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from lacflow.constants import (
    DEFAULT_KV_BANDS,
    DEFAULT_MODEL_PAIRS,
    DEFAULT_TOL_MVA,
    DEFAULT_TOLERANCES_MVAR,
    DEFAULT_TOLERANCES_MW,
    NEAR_ZERO_PU,
    SERIES_MIN_BASELINE_ERROR,
)
from lacflow.exceptions import EmptyFilter, MetricError, Undefined
from lacflow.grid.network import Network
from lacflow.metrics.errors import abs_dev_stats, filtered_mape, improvement
from lacflow.solvers.flows import SolvedState

Cell = Any


@dataclass
class ReportTable:
    """A named table: ``rows`` are tuples aligned with ``columns``."""

    name: str
    title: str
    columns: tuple[str, ...]
    rows: list[tuple[Cell, ...]] = field(default_factory=list)
    notes: tuple[str, ...] = ()

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=list(self.columns))

    def column(self, name: str) -> list[Cell]:
        pos = self.columns.index(name)
        return [row[pos] for row in self.rows]

    def row(self, label: str) -> dict[str, Cell]:
        """The row whose first cell equals ``label``."""
        for row in self.rows:
            if row[0] == label:
                return dict(zip(self.columns, row))
        raise KeyError(label)


def _attempt(fn: Callable[[], float]) -> Optional[float]:
    try:
        return fn()
    except (EmptyFilter, Undefined):
        return None


def _pct(value: Optional[float]) -> Optional[float]:
    return None if value is None else 100.0 * value


def _eta(eps_a: Optional[float], eps_b: Optional[float]) -> Optional[float]:
    if eps_a is None or eps_b is None:
        return None
    return _attempt(lambda: improvement(eps_a, eps_b))


def _active_pairs(
    pairs: Sequence[tuple[str, str]], models: Sequence[str]
) -> list[tuple[str, str]]:
    return [(a, b) for a, b in pairs if a in models and b in models]


def branch_angles(network: Network, state: SolvedState) -> np.ndarray:
    """theta_ij = va_from - va_to for each reported branch."""
    ends = np.array(
        [
            (network.index[network.branches[k].from_bus], network.index[network.branches[k].to_bus])
            for k in state.flows.branch
        ],
        dtype=int,
    ).reshape(-1, 2)
    va = np.asarray(state.va, dtype=float)
    return va[ends[:, 0]] - va[ends[:, 1]]


def _tol_label(tol: float, unit: str) -> str:
    return f"{tol:g} {unit}"


def flow_error_table(
    network: Network,
    ac: SolvedState,
    model_solutions: Mapping[str, SolvedState],
    tolerances: Sequence[float] = DEFAULT_TOLERANCES_MW,
    *,
    quantity: str = "P",
    pairs: Sequence[tuple[str, str]] = DEFAULT_MODEL_PAIRS,
    near_zero: float = NEAR_ZERO_PU,
) -> ReportTable:
    """Tolerance-filtered percentage errors of branch flows (and angles for P).

    Branches are selected by the AC from-side |P| in MW (|Q| in MVAr for ``quantity="Q"``).
    """
    if quantity not in ("P", "Q"):
        raise ValueError("quantity must be 'P' or 'Q'")
    reactive = quantity == "Q"
    unit = "MVAr" if reactive else "MW"
    base = network.base_mva
    ac_vals = ac.flows.q_from if reactive else ac.flows.p_from
    models = [
        m for m, sol in model_solutions.items() if not reactive or sol.flows.has_reactive
    ]
    filt = np.abs(ac_vals) * base
    ac_theta = branch_angles(network, ac)
    columns = ("row", *(_tol_label(t, unit) for t in tolerances))
    rows: list[tuple[Cell, ...]] = []

    rows.append(("# of branches", *(int(np.sum(filt >= t)) for t in tolerances)))
    eps: dict[tuple[str, str], list[Optional[float]]] = {}
    for model in models:
        sol = model_solutions[model]
        vals = sol.flows.q_from if reactive else sol.flows.p_from
        eps[(model, quantity)] = [
            _attempt(lambda t=t: filtered_mape(vals, ac_vals, filt, t, near_zero=near_zero).eps)
            for t in tolerances
        ]
        rows.append((f"{model} {quantity}_ij eps (%)", *map(_pct, eps[(model, quantity)])))
    if not reactive:
        for model in models:
            theta = branch_angles(network, model_solutions[model])
            eps[(model, "theta")] = [
                _attempt(
                    lambda t=t: filtered_mape(theta, ac_theta, filt, t, near_zero=near_zero).eps
                )
                for t in tolerances
            ]
            rows.append((f"{model} theta_ij eps (%)", *map(_pct, eps[(model, "theta")])))
    measures = (quantity,) if reactive else (quantity, "theta")
    for a, b in _active_pairs(pairs, models):
        for measure in measures:
            etas = [_eta(x, y) for x, y in zip(eps[(a, measure)], eps[(b, measure)])]
            rows.append((f"eta {measure}_ij {b} vs {a} (%)", *map(_pct, etas)))
    title = (
        f"Branch {'reactive' if reactive else 'active'} flow errors "
        f"(tolerance in {unit} for {quantity}_ij)"
    )
    return ReportTable(name=f"flow_errors_{quantity.lower()}", title=title, columns=columns, rows=rows)


def _band_mask(kv: np.ndarray, low: float, high: float) -> np.ndarray:
    return (kv >= low) & (kv < high)


def voltage_error_table(
    network: Network,
    ac: SolvedState,
    model_solutions: Mapping[str, SolvedState],
    kv_bands: Sequence[tuple[str, float, float]] = DEFAULT_KV_BANDS,
    *,
    pairs: Sequence[tuple[str, str]] = DEFAULT_MODEL_PAIRS,
) -> ReportTable:
    """Voltage magnitude errors per kV band: gamma in p.u., eps in %, and eta on eps."""
    models = list(model_solutions)
    active = _active_pairs(pairs, models)
    ac_vm = np.asarray(ac.vm, dtype=float)
    columns = ["band", "buses"]
    for model in models:
        columns += [f"{model} gamma (p.u.)", f"{model} eps (%)"]
    columns += [f"eta {b} vs {a} (%)" for a, b in active]
    rows: list[tuple[Cell, ...]] = []
    for label, low, high in kv_bands:
        mask = _band_mask(network.base_kv, low, high)
        cells: list[Cell] = [label, int(mask.sum())]
        eps: dict[str, Optional[float]] = {}
        for model in models:
            vm = np.asarray(model_solutions[model].vm, dtype=float)
            gamma = _attempt(lambda vm=vm: abs_dev_stats(vm, ac_vm, mask).mean)
            eps[model] = _attempt(
                lambda vm=vm: filtered_mape(vm[mask], ac_vm[mask], np.ones(int(mask.sum())), 0.0).eps
            )
            cells += [gamma, _pct(eps[model])]
        cells += [_pct(_eta(eps[a], eps[b])) for a, b in active]
        rows.append(tuple(cells))
    return ReportTable(
        name="voltage_errors",
        title="Voltage magnitude errors by voltage level (kV)",
        columns=tuple(columns),
        rows=rows,
    )


@dataclass
class ComplexPowerReport:
    summary: ReportTable
    errors: ReportTable
    series: dict[str, Any]


def complex_power_report(
    network: Network,
    ac: SolvedState,
    model_solutions: Mapping[str, SolvedState],
    tol_mva: float = DEFAULT_TOL_MVA,
    *,
    pairs: Sequence[tuple[str, str]] = DEFAULT_MODEL_PAIRS,
    series_min_error: float = SERIES_MIN_BASELINE_ERROR,
) -> ComplexPowerReport:
    """Apparent-power statistics, per-model eps/SADCP/gamma and per-branch error series.

    Raises:
        EmptyFilter: no branch carries at least ``tol_mva``
    """
    base = network.base_mva
    ac_s = ac.flows.s_from * base
    mask = ac_s >= tol_mva
    n = int(mask.sum())
    if n == 0:
        raise EmptyFilter(f"no branch carries at least {tol_mva} MVA")
    kept = ac_s[mask]
    summary = ReportTable(
        name="complex_power_summary",
        title=f"AC branch complex power |S| over branches with |S| >= {tol_mva:g} MVA",
        columns=("statistic", "MVA", "p.u."),
        rows=[
            ("branches", n, n),
            ("min", float(kept.min()), float(kept.min()) / base),
            ("max", float(kept.max()), float(kept.max()) / base),
            ("mean", float(kept.mean()), float(kept.mean()) / base),
            ("median", float(np.median(kept)), float(np.median(kept)) / base),
            (
                "standard deviation",
                float(np.std(kept, ddof=1)) if n > 1 else 0.0,
                (float(np.std(kept, ddof=1)) if n > 1 else 0.0) / base,
            ),
        ],
    )

    models = [m for m, sol in model_solutions.items() if sol.flows.has_reactive]
    rows: list[tuple[Cell, ...]] = []
    pct_errors: dict[str, np.ndarray] = {}
    for model in models:
        s_model = model_solutions[model].flows.s_from * base
        eps = filtered_mape(s_model, ac_s, ac_s, tol_mva).eps
        dev = abs_dev_stats(s_model, ac_s, mask)
        rows.append((model, 100.0 * eps, dev.sad, dev.mean, dev.sad / base, dev.n))
        pct_errors[model] = 100.0 * np.abs(s_model[mask] - kept) / kept
    errors = ReportTable(
        name="complex_power_errors",
        title="Branch complex power errors (SADCP)",
        columns=("model", "eps (%)", "SADCP (MVA)", "gamma (MVA)", "SADCP (p.u.)", "branches"),
        rows=rows,
    )
    return ComplexPowerReport(
        summary=summary,
        errors=errors,
        series=_error_series(
            network, ac, mask, pct_errors, _active_pairs(pairs, models), series_min_error
        ),
    )


def _error_series(
    network: Network,
    ac: SolvedState,
    mask: np.ndarray,
    pct_errors: dict[str, np.ndarray],
    pairs: Sequence[tuple[str, str]],
    series_min_error: float,
) -> dict[str, Any]:
    branches = [int(k) for k in np.asarray(ac.flows.branch)[mask]]
    if not pct_errors:
        return {"branch": branches, "sorted_by": None, "errors": {}, "filtered": {}}
    sort_model = pairs[-1][1] if pairs else next(iter(pct_errors))
    order = np.argsort(pct_errors[sort_model], kind="stable")
    series: dict[str, Any] = {
        "branch": [branches[i] for i in order],
        "sorted_by": sort_model,
        "errors": {m: [float(v) for v in e[order]] for m, e in pct_errors.items()},
        "filtered": {},
    }
    for baseline, improved in pairs:
        keep = pct_errors[baseline] >= 100.0 * series_min_error
        sub = np.flatnonzero(keep)
        sub = sub[np.argsort(pct_errors[improved][sub], kind="stable")]
        series["filtered"][f"{improved}_vs_{baseline}"] = {
            "branch": [branches[i] for i in sub],
            baseline: [float(pct_errors[baseline][i]) for i in sub],
            improved: [float(pct_errors[improved][i]) for i in sub],
        }
    return series


@dataclass(frozen=True)
class HourMetrics:
    """Per-hour values feeding the multi-hour table (fractions, not percent)."""

    hour: int
    voltage_gamma: Mapping[str, float]
    voltage_eps: Mapping[str, float]
    reactive_eps: Mapping[str, Optional[float]] = field(default_factory=dict)


def hour_metrics(
    network: Network,
    hour: int,
    ac: SolvedState,
    model_solutions: Mapping[str, SolvedState],
    *,
    tol_mvar: float = DEFAULT_TOLERANCES_MVAR[0],
) -> HourMetrics:
    ac_vm = np.asarray(ac.vm, dtype=float)
    gamma, v_eps, q_eps = {}, {}, {}
    for model, sol in model_solutions.items():
        vm = np.asarray(sol.vm, dtype=float)
        gamma[model] = abs_dev_stats(vm, ac_vm).mean
        v_eps[model] = filtered_mape(vm, ac_vm, np.ones(vm.size), 0.0).eps
        if sol.flows.has_reactive:
            filt = np.abs(ac.flows.q_from) * network.base_mva
            q_eps[model] = _attempt(
                lambda sol=sol, filt=filt: filtered_mape(
                    sol.flows.q_from, ac.flows.q_from, filt, tol_mvar
                ).eps
            )
    return HourMetrics(hour=hour, voltage_gamma=gamma, voltage_eps=v_eps, reactive_eps=q_eps)


def _mean_std(values: Sequence[Optional[float]]) -> tuple[Optional[float], Optional[float]]:
    present = [v for v in values if v is not None and not math.isnan(v)]
    if not present:
        return None, None
    arr = np.asarray(present)
    return float(arr.mean()), float(arr.std(ddof=1)) if arr.size > 1 else 0.0


def multi_hour_report(
    per_hour: Sequence[HourMetrics],
    *,
    pairs: Sequence[tuple[str, str]] = DEFAULT_MODEL_PAIRS,
) -> ReportTable:
    """Per-hour voltage and reactive-flow improvement with mean and std across hours.

    Raises:
        MetricError: fewer than two hours
    """
    if len(per_hour) < 2:
        raise MetricError("multi-hour report needs at least two hours")
    hours = sorted(per_hour, key=lambda h: h.hour)
    models = set(hours[0].voltage_gamma)
    active = _active_pairs(pairs, list(models))
    columns: list[str] = ["hour"]
    for a, b in active:
        columns += [
            f"{a} V gamma (p.u.)",
            f"{b} V gamma (p.u.)",
            f"eta V {b} vs {a} (%)",
        ]
        if all(a in h.reactive_eps and b in h.reactive_eps for h in hours):
            columns += [f"{a} Q eps (%)", f"{b} Q eps (%)", f"eta Q {b} vs {a} (%)"]
    rows: list[tuple[Cell, ...]] = []
    for h in hours:
        cells: list[Cell] = [h.hour]
        for a, b in active:
            cells += [
                h.voltage_gamma[a],
                h.voltage_gamma[b],
                _pct(_eta(h.voltage_eps[a], h.voltage_eps[b])),
            ]
            if f"{a} Q eps (%)" in columns:
                qa, qb = h.reactive_eps.get(a), h.reactive_eps.get(b)
                cells += [_pct(qa), _pct(qb), _pct(_eta(qa, qb))]
        rows.append(tuple(cells))
    mean_row: list[Cell] = ["mean"]
    std_row: list[Cell] = ["std"]
    for pos in range(1, len(columns)):
        mean, std = _mean_std([row[pos] for row in rows])
        mean_row.append(mean)
        std_row.append(std)
    rows += [tuple(mean_row), tuple(std_row)]
    return ReportTable(
        name="multi_hour",
        title=f"Improvement over {len(hours)} consecutive hourly cases",
        columns=tuple(columns),
        rows=rows,
    )
