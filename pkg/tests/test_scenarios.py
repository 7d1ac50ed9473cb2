"""Tests for the hourly scenario generator."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest

from lacflow.exceptions import CaseParseError, ConfigError
from lacflow.scenarios import (
    SCENARIO_INDEX,
    ScenarioSpec,
    generate_hourly_cases,
    load_multipliers,
    read_scenarios,
    scale_network,
    scenario_manifest,
    write_scenarios,
)


def test_multipliers_follow_daily_sinusoid_without_noise():
    lam = load_multipliers(ScenarioSpec(hours=24, amplitude=0.2, noise_sd=0.0))
    assert lam.shape == (24,)
    assert lam[17] == pytest.approx(1.0)  # hour 18
    assert lam[23] == pytest.approx(1.2)  # hour 24
    assert lam[11] == pytest.approx(0.8)  # hour 12


def test_multipliers_are_seeded_and_clipped():
    spec = ScenarioSpec(hours=200, noise_sd=0.2, seed=7)
    first, again = load_multipliers(spec), load_multipliers(spec)
    np.testing.assert_array_equal(first, again)
    assert first.min() >= 0.7 and first.max() <= 1.3
    other = load_multipliers(dataclasses.replace(spec, seed=8))
    assert not np.array_equal(first, other)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_consecutive_hours_change_smoothly(seed):
    spec = ScenarioSpec(hours=2000, seed=seed)
    steps = np.abs(np.diff(load_multipliers(spec)))
    bound = spec.amplitude * 2.0 * np.pi / 24.0 + 4.0 * spec.noise_sd
    assert np.mean(steps <= bound) > 0.99


@pytest.mark.parametrize(
    "kwargs",
    [
        {"hours": 0},
        {"amplitude": 1.0},
        {"noise_sd": -0.1},
        {"bounds": (1.1, 1.3)},
        {"seed": -1},
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ConfigError):
        ScenarioSpec(**kwargs)


def test_scaling_redispatches_non_slack_generation(case9):
    scaled = scale_network(case9, 1.1, name="case9_up")
    extra_load = 0.1 * case9.p_load.sum()
    non_slack = np.ones(case9.n_bus, dtype=bool)
    non_slack[case9.slack] = False
    assert scaled.p_load.sum() == pytest.approx(1.1 * case9.p_load.sum())
    assert scaled.p_gen[non_slack].sum() - case9.p_gen[non_slack].sum() == pytest.approx(extra_load)
    assert scaled.p_gen[case9.slack] == case9.p_gen[case9.slack]
    assert scaled.v_set.tolist() == case9.v_set.tolist()
    assert scaled.branches == case9.branches
    assert scaled.name == "case9_up"


def test_hourly_cases_are_named_by_hour(case9):
    cases = generate_hourly_cases(case9, ScenarioSpec(hours=3))
    assert [c.hour for c in cases] == [1, 2, 3]
    assert [c.network.name for c in cases] == ["case9_h001", "case9_h002", "case9_h003"]
    assert all(c.feasible for c in cases)


def test_infeasible_hours_are_flagged_not_dropped(two_bus):
    # peak multiplier 1.5 pushes 6.75 p.u. across a line that tops out near 5 p.u.
    heavy = dataclasses.replace(
        two_bus, buses=(two_bus.buses[0], dataclasses.replace(two_bus.buses[1], p_load=4.5))
    )
    spec = ScenarioSpec(hours=24, amplitude=0.5, noise_sd=0.0, bounds=(0.5, 1.5))
    cases = generate_hourly_cases(heavy, spec, check_feasibility=True)
    assert len(cases) == 24
    assert cases[11].feasible  # multiplier 0.5
    assert not cases[23].feasible
    assert cases[23].reason
    manifest = scenario_manifest(cases, spec, base_case="heavy.json")
    assert 24 in manifest["infeasible"]
    assert 12 not in manifest["infeasible"]


def test_write_then_read_scenarios(case9, fake_fs):
    spec = ScenarioSpec(hours=4, seed=3)
    cases = generate_hourly_cases(case9, spec)
    out = Path("scen")
    written = write_scenarios(cases, spec, out, base_case="case9.m", fs=fake_fs)
    assert [p.name for p in written] == [
        "hour_001.json",
        "hour_002.json",
        "hour_003.json",
        "hour_004.json",
        SCENARIO_INDEX,
    ]
    index = json.loads(fake_fs.read_text(out / SCENARIO_INDEX))
    assert index["base_case"] == "case9.m"
    assert index["spec"]["seed"] == 3
    assert index["lambda"] == pytest.approx([c.lam for c in cases])

    loaded = read_scenarios(out, fs=fake_fs)
    assert [c.hour for c in loaded] == [1, 2, 3, 4]
    assert [c.lam for c in loaded] == pytest.approx([c.lam for c in cases])
    np.testing.assert_allclose(loaded[2].network.p_load, cases[2].network.p_load, rtol=1e-12)


def test_read_without_index_uses_unit_multipliers(case9, fake_fs):
    spec = ScenarioSpec(hours=2)
    out = Path("scen")
    write_scenarios(generate_hourly_cases(case9, spec), spec, out, fs=fake_fs)
    del fake_fs.store[out / SCENARIO_INDEX]
    loaded = read_scenarios(out, fs=fake_fs)
    assert [(c.hour, c.lam) for c in loaded] == [(1, 1.0), (2, 1.0)]


def test_corrupt_index_is_a_parse_error(fake_fs):
    fake_fs.write_text(Path("scen") / SCENARIO_INDEX, "{\"hours\": 3}")
    with pytest.raises(CaseParseError):
        read_scenarios(Path("scen"), fs=fake_fs)
