"""Tests for regression tables and table serialization."""

from __future__ import annotations

import io
import json
import math
from pathlib import Path

import pandas as pd
import pytest

from lacflow.metrics.tables import ReportTable
from lacflow.regression.datasets import DesignMatrix
from lacflow.regression.ols import ols_fit
from lacflow.reports import (
    anova_table,
    coefficient_table,
    residual_series_table,
    residual_summary_table,
    table_to_csv,
    table_to_dict,
    vif_table,
    write_tables,
)


def test_coefficient_table(regression_corpus):
    fit = ols_fit(regression_corpus)
    table = coefficient_table(fit)
    assert table.name == "corpus_coefficients"
    assert table.column("term") == ["x1", "x2"]
    assert table.row("x1")["estimate"] == pytest.approx(fit.coefficient("x1"))
    assert any("uncentered" in note for note in table.notes)


def test_anova_and_vif_tables(regression_corpus):
    fit = ols_fit(regression_corpus)
    anova = anova_table(fit)
    assert anova.column("term") == ["x1", "x2", "Residuals"]
    assert anova.row("Residuals")["F value"] is None
    vif = vif_table(fit)
    assert vif.column("VIF >= 3") == [True, True]


def test_vif_table_absent_for_single_regressor(regression_corpus):
    single = DesignMatrix(x=regression_corpus.x[:, :1], y=regression_corpus.y, names=("x1",))
    assert vif_table(ols_fit(single)) is None


def test_residual_tables(regression_corpus):
    fit = ols_fit(regression_corpus)
    summary = residual_summary_table(fit)
    assert summary.column("residual") == ["e", "d", "t"]
    assert summary.row("e")["mean"] == pytest.approx(float(fit.residuals.mean()))
    series = residual_series_table(fit)
    assert len(series.rows) == fit.n
    assert series.column("observation")[0] == 1
    # squared standardized residuals sum to the residual degrees of freedom
    assert sum(d * d for d in series.column("d")) == pytest.approx(fit.df_resid)


def test_json_cells_are_strict():
    table = ReportTable(
        name="t", title="T", columns=("a", "b", "c"), rows=[("x", math.nan, math.inf)]
    )
    document = table_to_dict(table)
    assert document["rows"] == [["x", None, "inf"]]
    json.dumps(document, allow_nan=False)


def test_csv_round_trips_floats():
    table = ReportTable(name="t", title="T", columns=("a", "b"), rows=[("x", 0.1 + 0.2), ("y", None)])
    frame = pd.read_csv(io.StringIO(table_to_csv(table)), float_precision="round_trip")
    assert frame["b"][0] == 0.1 + 0.2
    assert math.isnan(frame["b"][1])


def test_write_tables_by_format(fake_fs):
    table = ReportTable(name="voltage_errors", title="V", columns=("band",), rows=[("all",)])
    written = write_tables([table], Path("out/tables"), ["csv", "json"], fs=fake_fs, prefix="hour_001_")
    assert written == [
        Path("out/tables/hour_001_voltage_errors.csv"),
        Path("out/tables/hour_001_voltage_errors.json"),
    ]
    assert json.loads(fake_fs.read_text(written[1]))["name"] == "voltage_errors"
    assert write_tables([table], Path("out"), ["md"], fs=fake_fs) == []
