"""Deterministic meshed test grids for end-to-end and performance runs.

Buses are scattered in the unit square. Each new bus connects to its nearest earlier
bus, which makes a spanning tree, and about half of them gain a second link to the
next-nearest one. Branches between buses of different voltage levels become
transformers with an off-nominal tap.
"""

from __future__ import annotations

import numpy as np

from lacflow.grid.network import Branch, Bus, BusKind, Generator, Network

_KV_LEVELS = (345.0, 138.0, 69.0)
_KV_SHARES = (0.15, 0.45, 0.40)
_GENERATOR_SPACING = 6


def _kv_levels(rng: np.random.Generator, n: int) -> np.ndarray:
    kv = rng.choice(np.asarray(_KV_LEVELS), size=n, p=np.asarray(_KV_SHARES))
    kv[0] = _KV_LEVELS[0]
    return kv


def _links(rng: np.random.Generator, xy: np.ndarray) -> list[tuple[int, int, float]]:
    links: list[tuple[int, int, float]] = []
    seen: set[tuple[int, int]] = set()
    for i in range(1, xy.shape[0]):
        dist = np.hypot(*(xy[:i] - xy[i]).T)
        order = np.argsort(dist, kind="stable")
        targets = [int(order[0])]
        if order.size > 1 and rng.random() < 0.5:
            targets.append(int(order[1]))
        for j in targets:
            key = (min(i, j), max(i, j))
            if key not in seen:
                seen.add(key)
                links.append((j, i, float(dist[j])))
    return links


def build_meshed_grid(n_buses: int = 300, seed: int = 0, *, base_mva: float = 100.0) -> Network:
    """A connected, meshed network with one slack and a generator on every sixth bus.

    The same ``(n_buses, seed)`` always yields the same network.
    """
    if n_buses < 2:
        raise ValueError("n_buses must be >= 2")
    rng = np.random.Generator(np.random.PCG64(seed))
    xy = rng.random((n_buses, 2))
    kv = _kv_levels(rng, n_buses)
    p_load = rng.uniform(5.0, 25.0, n_buses) / base_mva
    power_factor = rng.uniform(0.92, 0.98, n_buses)
    q_load = p_load * np.tan(np.arccos(power_factor))
    p_load[0] = q_load[0] = 0.0

    gen_positions = [p for p in range(_GENERATOR_SPACING, n_buses, _GENERATOR_SPACING)]
    share = 0.85 * float(p_load.sum()) / max(len(gen_positions), 1)
    generators = [Generator(bus=1, p_gen=0.0, v_set=1.05)]
    kinds = [BusKind.SLACK] + [BusKind.PQ] * (n_buses - 1)
    for p in gen_positions:
        kinds[p] = BusKind.PV
        generators.append(Generator(bus=p + 1, p_gen=share, v_set=float(rng.uniform(1.02, 1.05))))

    buses = tuple(
        Bus(
            id=p + 1,
            kind=kinds[p],
            p_load=float(p_load[p]),
            q_load=float(q_load[p]),
            base_kv=float(kv[p]),
        )
        for p in range(n_buses)
    )
    branches = []
    for f, t, dist in _links(rng, xy):
        x = 0.01 + 0.5 * dist
        if kv[f] != kv[t]:
            branches.append(Branch(f + 1, t + 1, r=0.0, x=x, tap=float(rng.uniform(0.97, 1.03))))
        else:
            r = x / rng.uniform(3.0, 10.0)
            branches.append(Branch(f + 1, t + 1, r=float(r), x=x, b_charging=0.4 * x))
    return Network(
        buses=buses,
        generators=tuple(generators),
        branches=tuple(branches),
        base_mva=base_mva,
        name=f"synthetic{n_buses}_s{seed}",
    )


__all__ = ["build_meshed_grid"]
