from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from lacflow.exceptions import Divergence, SolverError
from lacflow.grid.network import Branch, Bus, BusKind, Generator, Network
from lacflow.solvers.ac import AcOptions, build_ybus, power_mismatch, solve_ac


def test_ybus_of_lossless_line():
    network = Network(
        buses=(Bus(1, BusKind.SLACK), Bus(2)),
        generators=(Generator(1),),
        branches=(Branch(1, 2, r=0.0, x=0.1),),
    )
    ybus = build_ybus(network).toarray()
    np.testing.assert_allclose(ybus, np.array([[-10j, 10j], [10j, -10j]]))


def test_ybus_includes_bus_shunts():
    network = Network(
        buses=(Bus(1, BusKind.SLACK), Bus(2, g_shunt=0.01, b_shunt=0.2)),
        generators=(Generator(1),),
        branches=(Branch(1, 2, r=0.0, x=0.1),),
    )
    assert build_ybus(network)[1, 1] == pytest.approx(0.01 + 0.2j - 10j)


def test_two_bus_converges(two_bus):
    solution = solve_ac(two_bus)
    assert solution.max_mismatch < 1e-8
    assert solution.vm[0] == pytest.approx(1.0)
    assert solution.va[0] == 0.0
    # lossless line: what leaves bus 1 arrives at bus 2
    assert solution.flows.p_from[0] == pytest.approx(1.0, abs=1e-8)
    assert solution.flows.p_to[0] == pytest.approx(-1.0, abs=1e-8)
    assert solution.p_gen[0] == pytest.approx(1.0, abs=1e-8)
    assert solution.converged_from == "flat"


def test_case9_slack_dispatch(case9):
    solution = solve_ac(case9)
    assert solution.p_gen[case9.slack] * case9.base_mva == pytest.approx(71.64, abs=0.1)
    assert solution.vm.min() > 0.95
    assert solution.iterations <= 6


def test_injections_sum_to_branch_losses(case14):
    solution = solve_ac(case14)
    assert solution.p_inj.sum() == pytest.approx(solution.flows.p_loss.sum(), abs=1e-8)
    assert solution.flows.p_loss.sum() > 0.0


def test_returned_state_satisfies_mismatch_certificate(case14):
    solution = solve_ac(case14)
    assert power_mismatch(case14, solution.vm, solution.va) < 1e-8
    assert len(solution.mismatch_history) == solution.iterations + 1
    assert solution.mismatch_history[-1] < 1e-8
    assert solution.mismatch_history[0] > solution.mismatch_history[-1]


def test_warm_start_from_converged_solution(case9):
    first = solve_ac(case9)
    second = solve_ac(case9, start=first)
    assert second.converged_from == "warm"
    assert second.iterations <= 1
    np.testing.assert_allclose(second.vm, first.vm, atol=1e-8)


def test_iteration_cap_raises_divergence(case9):
    with pytest.raises(Divergence) as excinfo:
        solve_ac(case9, AcOptions(max_iter=1))
    assert excinfo.value.iterations == 1
    assert excinfo.value.code == "AC_DIVERGENCE"


def test_infeasible_load_fails(two_bus):
    # 20 p.u. across x = 0.1 is beyond the line's transfer limit
    heavy = dataclasses.replace(
        two_bus,
        buses=(two_bus.buses[0], dataclasses.replace(two_bus.buses[1], p_load=20.0)),
    )
    with pytest.raises(SolverError):
        solve_ac(heavy)


def test_options_reject_bad_values():
    with pytest.raises(ValueError):
        AcOptions(tol=0.0)
    with pytest.raises(ValueError):
        AcOptions(max_iter=0)


def test_reactive_limit_switches_pv_bus(triangle):
    free = solve_ac(triangle)
    needed = free.q_gen[1]
    limited_gen = dataclasses.replace(triangle.generators[1], q_max=needed - 0.1)
    limited = dataclasses.replace(
        triangle, generators=(triangle.generators[0], limited_gen)
    )

    unenforced = solve_ac(limited)
    assert unenforced.switched_to_pq == ()

    solution = solve_ac(limited, AcOptions(enforce_q_limits=True))
    assert solution.switched_to_pq == (2,)
    assert solution.q_gen[1] == pytest.approx(needed - 0.1, abs=1e-6)
    assert solution.vm[1] < triangle.v_set[1]
