from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
import pytest

from lacflow.exceptions import CaseParseError, CaseValidationError
from lacflow.grid.case_io import (
    MATPOWER,
    NATIVE,
    detect_format,
    dumps_native,
    load_case,
    matpower_to_network,
    parse_matpower,
    parse_native,
    save_case,
)
from lacflow.grid.network import BusKind
from tests.conftest import CASES_DIR, FakeFS

MINIMAL_MATPOWER = """\
function mpc = tiny
mpc.baseMVA = 100;
mpc.bus = [
    1 3 0 0 0 0 1 1.0 0 138 1 1.1 0.9;
    2 1 50 10 0 0 1 1.0 0 138 1 1.1 0.9;
];
mpc.gen = [
    1 50 0 100 -100 1.02 100 1 100 0;
];
mpc.branch = [
    1 2 0.01 0.1 0.02 100 100 100 0 0 1 -360 360;
];
"""


def test_detect_format_uses_suffix():
    assert detect_format(Path("case9.m")) == MATPOWER
    assert detect_format(Path("case9.M")) == MATPOWER
    assert detect_format(Path("case9.json")) == NATIVE


def test_bundled_case9_shape(case9):
    assert case9.n_bus == 9
    assert len(case9.generators) == 3
    assert len(case9.branches) == 9
    assert case9.kinds[0] is BusKind.SLACK
    assert case9.name == "case9"
    assert case9.p_load.sum() * case9.base_mva == pytest.approx(315.0)
    assert set(case9.base_kv.tolist()) == {345.0}


def test_bundled_case14_shape(case14):
    assert case14.n_bus == 14
    assert len(case14.branches) == 20
    assert case14.p_load.sum() * case14.base_mva == pytest.approx(259.0)
    # transformer rows carry their off-nominal ratios
    assert sorted({br.tap for br in case14.branches if br.tap != 1.0}) == pytest.approx(
        [0.932, 0.969, 0.978]
    )


def test_bundled_two_bus_native_case():
    network = load_case(CASES_DIR / "two_bus.json")
    assert network.n_bus == 2
    assert network.p_load.tolist() == [0.0, 1.0]
    assert network.branches[0].x == 0.1


def test_parse_matpower_records_ignored_sections():
    parsed = parse_matpower((CASES_DIR / "case9.m").read_text())
    assert "gencost" in parsed.ignored_sections
    assert set(parsed.matrices) == {"bus", "gen", "branch"}


def test_matpower_zero_ratio_means_nominal_tap():
    network = matpower_to_network(parse_matpower(MINIMAL_MATPOWER))
    assert network.branches[0].tap == 1.0
    assert network.buses[1].p_load == pytest.approx(0.5)
    assert network.generators[0].q_max == pytest.approx(1.0)


def test_matpower_non_numeric_value_names_line_and_column():
    text = MINIMAL_MATPOWER.replace("2 1 50 10", "2 1 abc 10")
    with pytest.raises(CaseParseError) as excinfo:
        parse_matpower(text)
    assert excinfo.value.line == 5
    assert excinfo.value.field == "PD"


def test_matpower_short_row_names_missing_column():
    text = MINIMAL_MATPOWER.replace("1 2 0.01 0.1 0.02 100 100 100 0 0 1 -360 360;", "1 2 0.01 0.1;")
    with pytest.raises(CaseParseError) as excinfo:
        matpower_to_network(parse_matpower(text))
    assert excinfo.value.field == "BR_B"


def test_matpower_missing_branch_matrix():
    text = MINIMAL_MATPOWER.split("mpc.branch")[0]
    with pytest.raises(CaseParseError, match="mpc.branch"):
        parse_matpower(text)


def test_matpower_unterminated_matrix():
    with pytest.raises(CaseParseError, match="unterminated"):
        parse_matpower(MINIMAL_MATPOWER.rsplit("];", 1)[0])


def test_matpower_isolated_bus_type_is_rejected():
    text = MINIMAL_MATPOWER.replace("2 1 50 10", "2 4 50 10")
    with pytest.raises(CaseParseError, match="bus type 4"):
        matpower_to_network(parse_matpower(text))


def test_native_rejects_unknown_keys():
    document = json.loads((CASES_DIR / "two_bus.json").read_text())
    document["buses"][0]["colour"] = "red"
    with pytest.raises(CaseParseError):
        parse_native(json.dumps(document))


def test_native_reports_json_line():
    with pytest.raises(CaseParseError) as excinfo:
        parse_native('{\n  "buses": [\n  oops\n]}')
    assert excinfo.value.line == 3


def test_load_case_validates(fake_fs):
    document = json.loads((CASES_DIR / "two_bus.json").read_text())
    document["buses"][0]["kind"] = "pq"
    path = Path("bad.json")
    fake_fs.write_text(path, json.dumps(document))
    with pytest.raises(CaseValidationError) as excinfo:
        load_case(path, fs=fake_fs)
    assert "no slack bus" in excinfo.value.violations


def test_save_then_load_reproduces_network(case14):
    fs = FakeFS()
    path = save_case(case14, Path("out/case14.json"), fs=fs)
    again = load_case(path, fs=fs)
    assert again.base_mva == case14.base_mva
    assert [b.id for b in again.buses] == [b.id for b in case14.buses]
    assert again.kinds == case14.kinds
    np.testing.assert_allclose(again.p_load, case14.p_load, rtol=1e-12)
    np.testing.assert_allclose(again.q_load, case14.q_load, rtol=1e-12)
    np.testing.assert_allclose(again.b_shunt, case14.b_shunt, rtol=1e-12)
    np.testing.assert_allclose(again.p_gen, case14.p_gen, rtol=1e-12)
    np.testing.assert_allclose(again.v_set, case14.v_set, rtol=1e-12)
    assert [(b.from_bus, b.to_bus, b.r, b.x, b.b_charging, b.tap) for b in again.branches] == [
        (b.from_bus, b.to_bus, b.r, b.x, b.b_charging, b.tap) for b in case14.branches
    ]


def test_native_round_trip_is_exact(case14):
    again = parse_native(dumps_native(case14))
    assert again.buses == case14.buses
    assert again.branches == case14.branches
    assert [b.a_init for b in again.buses] == [b.a_init for b in case14.buses]


def test_native_reads_degree_angles():
    document = json.loads((CASES_DIR / "two_bus.json").read_text())
    document["buses"][1]["va_deg"] = -5.0
    document["buses"][1].pop("va_rad", None)
    assert parse_native(json.dumps(document)).buses[1].a_init == pytest.approx(math.radians(-5.0))


def test_native_document_name_wins_over_file_stem(case9):
    document = json.loads(dumps_native(case9))
    document["name"] = "case9_h001"
    assert parse_native(json.dumps(document), name="hour_001").name == "case9_h001"
    document.pop("name")
    assert parse_native(json.dumps(document), name="hour_001").name == "hour_001"


def test_native_omits_infinite_reactive_limits(two_bus):
    document = json.loads(dumps_native(two_bus))
    assert "q_max_mvar" not in document["generators"][0]
    assert math.isinf(parse_native(dumps_native(two_bus)).generators[0].q_max)
