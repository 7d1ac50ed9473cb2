from __future__ import annotations

import json

import numpy as np
import pytest

from lacflow.exceptions import TopologyMismatch
from lacflow.regression.datasets import (
    DDC_COLUMNS,
    INTERCEPT,
    P_COLUMNS,
    Q_COLUMNS,
    DesignMatrix,
    assemble_ddc_dataset,
    assemble_p_dataset,
    assemble_q_dataset,
)
from lacflow.regression.fitting import coefficient_fit_to_dict, fit_model_coefficients
from lacflow.regression.ols import ols_fit
from lacflow.scenarios import scale_network
from lacflow.solvers.ac import solve_ac
from lacflow.solvers.coefficients import ModelCoefficients
from lacflow.solvers.linear import solve_dc_family, solve_lac_family

LAMBDAS = (0.85, 0.95, 1.05, 1.15)


@pytest.fixture(scope="module")
def case9_hours(case9):
    return [scale_network(case9, lam, name=f"case9_l{lam}") for lam in LAMBDAS]


@pytest.fixture(scope="module")
def case9_ac(case9_hours):
    return [solve_ac(network) for network in case9_hours]


def test_dataset_shape_and_row_keys(case9, case9_ac):
    d = assemble_p_dataset(case9, case9_ac, ["a", "b", "c", "d"])
    assert d.names == P_COLUMNS
    assert d.n == 4 * len(case9.branches)
    assert d.row_keys[0] == "a:0"
    assert d.row_keys[-1] == f"d:{len(case9.branches) - 1}"
    assert d.label == "P"


def test_datasets_recover_identity_from_linear_solutions(case9_hours):
    base = case9_hours[0]
    lac = [solve_lac_family(network) for network in case9_hours]
    dc = [solve_dc_family(network) for network in case9_hours]

    p_fit = ols_fit(assemble_p_dataset(base, lac))
    q_fit = ols_fit(assemble_q_dataset(base, lac))
    ddc_fit = ols_fit(assemble_ddc_dataset(base, dc))

    np.testing.assert_allclose(p_fit.beta, [1.0, 1.0], rtol=1e-7)
    np.testing.assert_allclose(q_fit.beta, [1.0, 1.0, 1.0], rtol=1e-7)
    np.testing.assert_allclose(ddc_fit.beta, [1.0], rtol=1e-7)
    assert q_fit.names == Q_COLUMNS
    assert ddc_fit.names == DDC_COLUMNS


@pytest.mark.parametrize(
    "k_a, k_d",
    [((1.3, 0.7, 0.9, 1.05, 1.02), 0.8), ((0.5, 1.5, 1.2, 0.6, 1.4), 1.5)],
)
def test_datasets_recover_generating_coefficients(case9_hours, k_a, k_d):
    base = case9_hours[0]
    coeffs = ModelCoefficients(k_d=k_d, k_a=k_a)
    dlac = [solve_lac_family(network, coeffs, model="dlac") for network in case9_hours]
    ddc = [solve_dc_family(network, k_d) for network in case9_hours]

    p_fit = ols_fit(assemble_p_dataset(base, dlac))
    q_fit = ols_fit(assemble_q_dataset(base, dlac))
    ddc_fit = ols_fit(assemble_ddc_dataset(base, ddc))

    np.testing.assert_allclose(p_fit.beta, k_a[:2], atol=1e-8)
    np.testing.assert_allclose(q_fit.beta, k_a[2:], atol=1e-8)
    np.testing.assert_allclose(ddc_fit.beta, [k_d], atol=1e-8)
    for fit in (p_fit, q_fit, ddc_fit):
        assert fit.r2_uncentered >= 1.0 - 1e-12

    fitted = fit_model_coefficients(base, dlac).coefficients
    np.testing.assert_allclose(fitted.k_a, k_a, atol=1e-8)


def test_reactive_dataset_needs_reactive_flows(case9):
    with pytest.raises(TopologyMismatch):
        assemble_q_dataset(case9, [solve_dc_family(case9)])


def test_solutions_must_share_topology(case9, case14):
    with pytest.raises(TopologyMismatch):
        assemble_p_dataset(case9, [solve_ac(case14)])
    with pytest.raises(TopologyMismatch):
        assemble_p_dataset(case9, [])


def test_case_ids_must_match(case9, case9_ac):
    with pytest.raises(ValueError):
        assemble_ddc_dataset(case9, case9_ac, ["only-one"])


def test_design_matrix_validation():
    with pytest.raises(ValueError, match="names"):
        DesignMatrix(x=np.ones((3, 2)), y=np.ones(3), names=("a",))
    with pytest.raises(ValueError, match="unique"):
        DesignMatrix(x=np.ones((3, 2)), y=np.ones(3), names=("a", "a"))
    with pytest.raises(ValueError, match="rows"):
        DesignMatrix(x=np.ones((3, 1)), y=np.ones(4), names=("a",))
    d = DesignMatrix(x=np.arange(3.0), y=np.ones(3), names=("a",))
    assert d.with_intercept().names == (INTERCEPT, "a")
    assert d.with_intercept().with_intercept().k == 2


def test_fitted_coefficients_stay_near_physics(case9, case9_ac):
    case_ids = [f"case9_h{h:03d}" for h in range(len(case9_ac))]
    fit = fit_model_coefficients(case9, case9_ac, case_ids=case_ids, fit_stats_ref="diagnostics.json")
    coeffs = fit.coefficients
    assert coeffs.trained_on == tuple(case_ids)
    assert coeffs.fit_stats_ref == "diagnostics.json"
    assert 0.8 < coeffs.k_d < 1.2
    assert 0.8 < coeffs.k_a[0] < 1.2
    assert np.all(np.isfinite(coeffs.k_a))
    assert coeffs.provenance["observations"] == 4 * len(case9.branches)
    assert coeffs.provenance["free_intercept"] is False
    assert fit.ddc_fit.r2 > 0.95


def test_free_intercept_records_intercepts(case9, case9_ac):
    fit = fit_model_coefficients(case9, case9_ac, free_intercept=True)
    assert all(f.has_intercept for f in fit.fits)
    assert set(fit.coefficients.provenance["intercepts"]) == {"P", "Q", "DDC"}
    assert len(fit.coefficients.k_a) == 5


def test_fit_document_is_strict_json(case9, case9_ac):
    document = coefficient_fit_to_dict(fit_model_coefficients(case9, case9_ac))
    text = json.dumps(document, allow_nan=False)
    again = json.loads(text)
    assert set(again["fits"]) == {"P", "Q", "DDC"}
    assert again["fits"]["DDC"]["vif"] is None
    assert again["fits"]["P"]["anova"][-1]["name"] == "Residuals"
