"""Train-then-evaluate protocol over generated hourly scenarios.

Training cases come from one scenario seed, evaluation hours from another, so the
data-driven models are always scored on hours they were not fitted on.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from pathlib import Path

import pytest

from lacflow import cli
from lacflow.grid.case_io import save_case
from lacflow.grid.synthetic import build_meshed_grid
from lacflow.scenarios import SCENARIO_INDEX
from tests.conftest import CASES_DIR


@pytest.fixture(autouse=True)
def _reset_root_logger():
    yield
    logging.getLogger().handlers.clear()


def _run(*argv: str) -> None:
    assert cli.run(list(argv)) == 0


def _protocol(tmp_path: Path, case: Path, train_hours: int, eval_hours: int) -> tuple[Path, float]:
    """Fit on one seed, evaluate on another; returns the results dir and the eval wall time."""
    base = str(case)
    train_dir = tmp_path / "train"
    eval_dir = tmp_path / "hours"
    fit_dir = tmp_path / "fit"
    results = tmp_path / "results"

    _run("scenarios", "--base", base, "--hours", str(train_hours), "--seed", "1", "--out-dir", str(train_dir))
    train_files = sorted(str(p) for p in train_dir.glob("hour_*.json"))
    _run("fit", "--train", *train_files, "--out", str(fit_dir / "coefficients.json"))
    _run("scenarios", "--base", base, "--hours", str(eval_hours), "--seed", "2", "--out-dir", str(eval_dir))
    clock = time.perf_counter()
    _run(
        "eval",
        "--cases-dir", str(eval_dir),
        "--coeffs", str(fit_dir / "coefficients.json"),
        "--models", "dc,ddc,lac,dlac",
        "--threads", "1",
        "--out-dir", str(results),
    )
    return results, time.perf_counter() - clock


def _rows(path: Path) -> list[dict[str, str]]:
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


def test_case9_protocol(tmp_path):
    results, _ = _protocol(tmp_path, CASES_DIR / "case9.m", train_hours=6, eval_hours=3)

    coeffs = json.loads((tmp_path / "fit" / "coefficients.json").read_text())
    assert coeffs["trained_on"] == [f"case9_h{h:03d}" for h in range(1, 7)]
    assert coeffs["fit_stats_ref"] == "diagnostics.json"

    assert json.loads((results / "failures.json").read_text()) == []
    for hour in (1, 2, 3):
        raw = results / "raw" / f"hour_{hour:03d}"
        assert sorted(p.stem for p in raw.glob("*.json")) == ["ac", "dc", "ddc", "dlac", "lac"]

    multi = _rows(results / "tables" / "multi_hour.csv")
    assert [row["hour"] for row in multi] == ["1", "2", "3", "mean", "std"]
    report = (results / "report.md").read_text()
    assert "K_D" in report

    manifest = json.loads((results / "manifest.json").read_text())
    (run,) = manifest["runs"]
    assert run["inputs"]["coeffs"].endswith("coefficients.json")
    assert "failures.json" in run["artifacts"]


def test_tables_are_rebuilt_from_raw_solutions(tmp_path):
    results, _ = _protocol(tmp_path, CASES_DIR / "case9.m", train_hours=4, eval_hours=2)
    table = results / "tables" / "hour_002_flow_errors_p.csv"
    first = table.read_text()
    _run(
        "eval",
        "--cases-dir", str(tmp_path / "hours"),
        "--coeffs", str(tmp_path / "fit" / "coefficients.json"),
        "--models", "dc,ddc,lac,dlac",
        "--threads", "1",
        "--out-dir", str(results),
    )
    assert table.read_text() == first
    assert len(json.loads((results / "manifest.json").read_text())["runs"]) == 2


def _hour_rows(results: Path) -> list[dict[str, str]]:
    return [row for row in _rows(results / "tables" / "multi_hour.csv") if row["hour"].isdigit()]


def _row(rows: list[dict[str, str]], label: str) -> dict[str, str]:
    (match,) = [row for row in rows if row["row"] == label]
    return match


@pytest.mark.slow
def test_case14_day(tmp_path):
    results, _ = _protocol(tmp_path, CASES_DIR / "case14.m", train_hours=24, eval_hours=24)
    index = json.loads((tmp_path / "hours" / SCENARIO_INDEX).read_text())
    assert len(index["hours"]) == 24
    failed = json.loads((results / "failures.json").read_text())
    hours = _hour_rows(results)
    assert len(hours) == 24 - len(failed)

    coeffs = json.loads((tmp_path / "fit" / "coefficients.json").read_text())
    assert coeffs["k_d"] > 1.0

    better = [float(h["dlac V gamma (p.u.)"]) < float(h["lac V gamma (p.u.)"]) for h in hours]
    assert sum(better) >= 0.8 * len(hours)
    summary = {row["hour"]: row for row in _rows(results / "tables" / "multi_hour.csv")}
    assert float(summary["mean"]["eta V dlac vs lac (%)"]) > 0.0
    assert float(summary["mean"]["eta Q dlac vs lac (%)"]) > 0.0

    for table in sorted((results / "tables").glob("hour_*_flow_errors_p.csv")):
        rows = _rows(table)
        lac = float(_row(rows, "lac P_ij eps (%)")["10 MW"])
        dc = float(_row(rows, "dc P_ij eps (%)")["10 MW"])
        assert lac <= dc, table.name


@pytest.mark.slow
def test_three_day_run_on_large_synthetic_grid(tmp_path):
    base = save_case(build_meshed_grid(300, seed=0), tmp_path / "synthetic300.json")
    results, eval_seconds = _protocol(tmp_path, base, train_hours=4, eval_hours=72)
    failed = json.loads((results / "failures.json").read_text())
    assert len(_hour_rows(results)) == 72 - len(failed)
    assert eval_seconds < 60.0
