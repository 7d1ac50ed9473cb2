from __future__ import annotations

import numpy as np
import pytest

from lacflow.grid.network import BusKind, validate
from lacflow.grid.synthetic import build_meshed_grid


def test_same_seed_gives_same_grid():
    a = build_meshed_grid(60, seed=3)
    b = build_meshed_grid(60, seed=3)
    assert a.branches == b.branches
    np.testing.assert_array_equal(a.p_load, b.p_load)


def test_different_seeds_differ():
    a = build_meshed_grid(60, seed=1)
    b = build_meshed_grid(60, seed=2)
    assert a.branches != b.branches


def test_grid_is_valid_and_meshed():
    network = build_meshed_grid(120, seed=0)
    assert validate(network) == []
    assert network.n_bus == 120
    # a spanning tree has n - 1 branches; extra links close loops
    assert len(network.branches) > network.n_bus - 1
    assert network.name == "synthetic120_s0"


def test_generator_placement():
    network = build_meshed_grid(30, seed=5)
    assert network.kinds[0] is BusKind.SLACK
    pv_buses = [b.id for b, kind in zip(network.buses, network.kinds) if kind is BusKind.PV]
    assert pv_buses == [7, 13, 19, 25]
    assert network.p_load[0] == 0.0


def test_transformers_join_voltage_levels():
    network = build_meshed_grid(80, seed=4)
    kv = {b.id: b.base_kv for b in network.buses}
    for branch in network.branches:
        if kv[branch.from_bus] != kv[branch.to_bus]:
            assert branch.r == 0.0
            assert 0.97 <= branch.tap <= 1.03
        else:
            assert branch.tap == 1.0


def test_rejects_single_bus():
    with pytest.raises(ValueError):
        build_meshed_grid(1)
