from __future__ import annotations

from types import SimpleNamespace

import numpy as np
import pytest

from lacflow.exceptions import EmptyFilter, MetricError
from lacflow.metrics.tables import (
    HourMetrics,
    branch_angles,
    complex_power_report,
    flow_error_table,
    hour_metrics,
    multi_hour_report,
    voltage_error_table,
)
from lacflow.solvers.flows import BranchFlows

BRANCHES = np.arange(3)


def _state(vm, va, p, q=None):
    p = np.asarray(p, dtype=float)
    q = None if q is None else np.asarray(q, dtype=float)
    return SimpleNamespace(
        vm=np.asarray(vm, dtype=float),
        va=np.asarray(va, dtype=float),
        flows=BranchFlows(
            branch=BRANCHES, p_from=p, p_to=-p, q_from=q, q_to=None if q is None else -q
        ),
    )


# Triangle branches run 1-2, 2-3 and 1-3; AC flows of 30, 5 and 80 MW.
AC = _state([1.04, 1.02, 0.98], [0.0, -0.02, -0.1], [0.3, 0.05, 0.8], [0.4, -0.2, 0.6])
DC = _state([1.0, 1.0, 1.0], [0.0, -0.022, -0.11], [0.33, 0.06, 0.76])
DDC = _state([1.0, 1.0, 1.0], [0.0, -0.021, -0.105], [0.315, 0.055, 0.78])
LAC = _state([1.04, 1.02, 1.0], [0.0, -0.02, -0.1], [0.33, 0.05, 0.72], [0.44, -0.22, 0.54])
DLAC = _state([1.04, 1.02, 0.99], [0.0, -0.02, -0.1], [0.315, 0.05, 0.76], [0.42, -0.21, 0.57])


def test_branch_angles_follow_branch_orientation(triangle):
    np.testing.assert_allclose(branch_angles(triangle, AC), [0.02, 0.08, 0.1])


def test_active_flow_table(triangle):
    table = flow_error_table(triangle, AC, {"dc": DC, "ddc": DDC}, (1.0, 10.0, 50.0))
    assert table.name == "flow_errors_p"
    assert table.columns == ("row", "1 MW", "10 MW", "50 MW")
    assert table.row("# of branches") == {"row": "# of branches", "1 MW": 3, "10 MW": 2, "50 MW": 1}
    assert table.row("dc P_ij eps (%)")["1 MW"] == pytest.approx(35.0 / 3.0)
    assert table.row("dc P_ij eps (%)")["10 MW"] == pytest.approx(7.5)
    assert table.row("ddc P_ij eps (%)")["50 MW"] == pytest.approx(2.5)
    assert table.row("dc theta_ij eps (%)")["1 MW"] == pytest.approx(10.0)
    assert table.row("ddc theta_ij eps (%)")["1 MW"] == pytest.approx(5.0)
    assert table.row("eta P_ij ddc vs dc (%)")["10 MW"] == pytest.approx(50.0)
    assert table.row("eta theta_ij ddc vs dc (%)")["50 MW"] == pytest.approx(50.0)


def test_tolerance_above_every_flow_leaves_empty_cells(triangle):
    table = flow_error_table(triangle, AC, {"dc": DC, "ddc": DDC}, (500.0,))
    assert table.row("# of branches")["500 MW"] == 0
    assert table.row("dc P_ij eps (%)")["500 MW"] is None
    assert table.row("eta P_ij ddc vs dc (%)")["500 MW"] is None


def test_reactive_table_skips_models_without_reactive_power(triangle):
    table = flow_error_table(
        triangle, AC, {"dc": DC, "lac": LAC, "dlac": DLAC}, (1.0, 25.0), quantity="Q"
    )
    assert table.name == "flow_errors_q"
    labels = table.column("row")
    assert "dc Q_ij eps (%)" not in labels
    assert not any("theta" in label for label in labels)
    assert table.row("# of branches")["25 MVAr"] == 2
    assert table.row("lac Q_ij eps (%)")["25 MVAr"] == pytest.approx(10.0)
    assert table.row("dlac Q_ij eps (%)")["25 MVAr"] == pytest.approx(5.0)
    assert table.row("eta Q_ij dlac vs lac (%)")["25 MVAr"] == pytest.approx(50.0)


def test_unknown_quantity(triangle):
    with pytest.raises(ValueError):
        flow_error_table(triangle, AC, {"dc": DC}, quantity="S")


def test_voltage_table_by_band(triangle):
    table = voltage_error_table(triangle, AC, {"lac": LAC, "dlac": DLAC})
    assert table.columns[-1] == "eta dlac vs lac (%)"
    everything = table.row("all")
    assert everything["buses"] == 3
    assert everything["lac gamma (p.u.)"] == pytest.approx(0.02 / 3.0)
    assert everything["lac eps (%)"] == pytest.approx(100.0 * (0.02 / 0.98) / 3.0)
    sub = table.row("100-200")
    assert sub["buses"] == 1
    assert sub["dlac gamma (p.u.)"] == pytest.approx(0.01)
    assert sub["eta dlac vs lac (%)"] == pytest.approx(50.0)
    # exact agreement leaves eta undefined
    assert table.row(">=200")["eta dlac vs lac (%)"] is None
    empty = table.row("20-100")
    assert empty["buses"] == 0
    assert empty["lac gamma (p.u.)"] is None


def test_complex_power_report(triangle):
    report = complex_power_report(triangle, AC, {"dc": DC, "lac": LAC, "dlac": DLAC}, 30.0)
    summary = report.summary
    assert summary.row("branches")["MVA"] == 2
    assert summary.row("min")["MVA"] == pytest.approx(50.0)
    assert summary.row("max")["p.u."] == pytest.approx(1.0)
    assert summary.row("median")["MVA"] == pytest.approx(75.0)
    assert summary.row("standard deviation")["MVA"] == pytest.approx(np.std([50.0, 100.0], ddof=1))

    assert report.errors.column("model") == ["lac", "dlac"]
    lac = report.errors.row("lac")
    assert lac["eps (%)"] == pytest.approx(10.0)
    assert lac["SADCP (MVA)"] == pytest.approx(15.0)
    assert lac["gamma (MVA)"] == pytest.approx(7.5)
    assert lac["SADCP (p.u.)"] == pytest.approx(0.15)
    assert report.errors.row("dlac")["eps (%)"] == pytest.approx(5.0)

    series = report.series
    assert series["sorted_by"] == "dlac"
    assert series["branch"] == [0, 2]
    assert series["filtered"]["dlac_vs_lac"]["branch"] == [0, 2]


def test_complex_power_needs_a_loaded_branch(triangle):
    with pytest.raises(EmptyFilter):
        complex_power_report(triangle, AC, {"lac": LAC}, 500.0)


def test_hour_metrics(triangle):
    metrics = hour_metrics(triangle, 7, AC, {"dc": DC, "lac": LAC})
    assert metrics.hour == 7
    assert metrics.voltage_gamma["lac"] == pytest.approx(0.02 / 3.0)
    assert metrics.voltage_gamma["dc"] == pytest.approx(0.08 / 3.0)
    assert "dc" not in metrics.reactive_eps
    assert metrics.reactive_eps["lac"] == pytest.approx((0.1 + 0.1 + 0.1) / 3.0)


def _hour(hour, lac, dlac):
    return HourMetrics(
        hour=hour,
        voltage_gamma={"lac": lac, "dlac": dlac},
        voltage_eps={"lac": lac, "dlac": dlac},
        reactive_eps={"lac": 2 * lac, "dlac": 2 * dlac},
    )


def test_multi_hour_report_adds_mean_and_std():
    table = multi_hour_report([_hour(1, 0.02, 0.01), _hour(0, 0.04, 0.01)])
    assert table.name == "multi_hour"
    assert table.column("hour") == [0, 1, "mean", "std"]
    assert "eta Q dlac vs lac (%)" in table.columns
    etas = table.column("eta V dlac vs lac (%)")
    assert etas[:2] == pytest.approx([75.0, 50.0])
    assert etas[2] == pytest.approx(62.5)
    assert etas[3] == pytest.approx(np.std([75.0, 50.0], ddof=1))


def test_multi_hour_needs_two_hours():
    with pytest.raises(MetricError):
        multi_hour_report([_hour(0, 0.02, 0.01)])


def test_table_frame_and_missing_row(triangle):
    table = voltage_error_table(triangle, AC, {"lac": LAC})
    frame = table.to_frame()
    assert list(frame.columns) == list(table.columns)
    assert len(frame) == 5
    with pytest.raises(KeyError):
        table.row("nope")
