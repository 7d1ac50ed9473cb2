from __future__ import annotations

import numpy as np
import pytest

from lacflow.exceptions import CaseParseError
from lacflow.solvers.ac import solve_ac
from lacflow.solvers.flows import BranchFlows, solution_from_dict, solution_to_dict
from lacflow.solvers.linear import solve_dc_family


def test_export_uses_megawatts(two_bus):
    payload = solution_to_dict(solve_ac(two_bus), model="ac", case="two_bus", base_mva=100.0)
    record = payload["flows"][0]
    assert record["branch"] == 0
    assert record["p_from_mw"] == pytest.approx(100.0, abs=1e-6)
    assert record["q_from_mvar"] is not None
    assert payload["iterations"] > 0


def test_dc_export_has_no_reactive_fields(two_bus):
    payload = solution_to_dict(solve_dc_family(two_bus), model="dc", case="two_bus", base_mva=100.0)
    assert payload["q_inj"] is None
    assert payload["flows"][0]["q_to_mvar"] is None
    stored = solution_from_dict(payload)
    assert stored.q_inj is None
    assert not stored.flows.has_reactive


def test_stored_solution_returns_per_unit(case9):
    solution = solve_ac(case9)
    stored = solution_from_dict(
        solution_to_dict(solution, model="ac", case="case9", base_mva=case9.base_mva)
    )
    np.testing.assert_allclose(stored.flows.q_to, solution.flows.q_to, atol=1e-12)
    assert stored.case == "case9"


def test_unknown_model_tag_is_rejected(two_bus):
    payload = solution_to_dict(solve_dc_family(two_bus), model="dc", case="x", base_mva=100.0)
    payload["model"] = "fdlf"
    with pytest.raises(CaseParseError) as excinfo:
        solution_from_dict(payload)
    assert excinfo.value.field == "model"


def test_missing_key_is_a_parse_error():
    with pytest.raises(CaseParseError, match="malformed"):
        solution_from_dict({"model": "dc"})


def test_apparent_power_needs_reactive_flows():
    flows = BranchFlows(branch=np.array([0]), p_from=np.array([0.3]), p_to=np.array([-0.3]))
    with pytest.raises(ValueError):
        flows.s_from
    full = BranchFlows(
        branch=np.array([0]),
        p_from=np.array([0.3]),
        p_to=np.array([-0.29]),
        q_from=np.array([0.4]),
        q_to=np.array([-0.38]),
    )
    assert full.s_from[0] == pytest.approx(0.5)
    assert full.p_loss[0] == pytest.approx(0.01)
    assert len(full) == 1
