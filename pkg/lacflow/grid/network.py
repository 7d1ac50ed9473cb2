"""Network model: buses, generators, branches, admittances, and validation.

All quantities are per-unit on the system MVA base; angles are radians. A Network is
immutable once built, so it can be shared freely between concurrent solves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from lacflow.constants import DEFAULT_BASE_MVA
from lacflow.exceptions import InvalidBranch, UnsupportedPhaseShift


class BusKind(str, Enum):
    SLACK = "slack"
    PV = "pv"
    PQ = "pq"


@dataclass(frozen=True)
class Bus:
    """A network bus.

    ``kind`` may be None when the source leaves it implicit; it is then inferred as PV
    when an in-service generator sits on the bus and PQ otherwise.
    """

    id: int
    kind: Optional[BusKind] = None
    p_load: float = 0.0
    q_load: float = 0.0
    g_shunt: float = 0.0
    b_shunt: float = 0.0
    base_kv: float = 1.0
    v_init: float = 1.0
    a_init: float = 0.0

    def __post_init__(self) -> None:
        if self.kind is not None and not isinstance(self.kind, BusKind):
            object.__setattr__(self, "kind", BusKind(str(self.kind).lower()))


@dataclass(frozen=True)
class Generator:
    bus: int
    p_gen: float = 0.0
    q_gen: float = 0.0
    v_set: float = 1.0
    q_min: float = -math.inf
    q_max: float = math.inf
    in_service: bool = True


@dataclass(frozen=True)
class Branch:
    """A line or transformer; ``b_charging`` is the total charging susceptance."""

    from_bus: int
    to_bus: int
    r: float
    x: float
    b_charging: float = 0.0
    tap: float = 1.0
    shift: float = 0.0
    rate_a: float = 0.0
    in_service: bool = True


@dataclass(frozen=True)
class PiModel:
    """Pi-equivalent of a branch: series admittance plus full end shunts."""

    g: float
    b: float
    g_from: float
    b_from: float
    g_to: float
    b_to: float


@dataclass(frozen=True)
class BranchArrays:
    """Vectorized pi-equivalent parameters of the in-service branches.

    ``index`` holds each row's position in ``Network.branches``; ``f``/``t`` are bus
    positions. ``x`` and ``tap`` are the raw series reactance and tap ratio.
    """

    index: np.ndarray
    f: np.ndarray
    t: np.ndarray
    g: np.ndarray
    b: np.ndarray
    g_from: np.ndarray
    b_from: np.ndarray
    g_to: np.ndarray
    b_to: np.ndarray
    shift: np.ndarray
    x: np.ndarray
    tap: np.ndarray

    def __len__(self) -> int:
        return int(self.index.size)


@dataclass(frozen=True)
class Network:
    """Buses, generators and branches of one operating case."""

    buses: tuple[Bus, ...]
    generators: tuple[Generator, ...] = ()
    branches: tuple[Branch, ...] = ()
    base_mva: float = DEFAULT_BASE_MVA
    name: str = ""
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "buses", tuple(sorted(self.buses, key=lambda b: b.id)))
        object.__setattr__(self, "generators", tuple(self.generators))
        object.__setattr__(self, "branches", tuple(self.branches))

    @property
    def n_bus(self) -> int:
        return len(self.buses)

    @cached_property
    def index(self) -> dict[int, int]:
        """External bus id to position (ascending id order)."""
        return {bus.id: pos for pos, bus in enumerate(self.buses)}

    @cached_property
    def bus_ids(self) -> np.ndarray:
        return np.array([bus.id for bus in self.buses], dtype=int)

    @cached_property
    def active_branches(self) -> tuple[int, ...]:
        return tuple(k for k, br in enumerate(self.branches) if br.in_service)

    @cached_property
    def _generation(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        p_gen = np.zeros(self.n_bus)
        q_gen = np.zeros(self.n_bus)
        has_gen = np.zeros(self.n_bus, dtype=bool)
        v_set = np.array([bus.v_init for bus in self.buses], dtype=float)
        for gen in self.generators:
            pos = self.index.get(gen.bus)
            if pos is None or not gen.in_service:
                continue
            p_gen[pos] += gen.p_gen
            q_gen[pos] += gen.q_gen
            if not has_gen[pos]:
                v_set[pos] = gen.v_set
                has_gen[pos] = True
        return p_gen, q_gen, v_set, has_gen

    @property
    def p_gen(self) -> np.ndarray:
        return self._generation[0]

    @property
    def q_gen(self) -> np.ndarray:
        return self._generation[1]

    @property
    def v_set(self) -> np.ndarray:
        """Voltage setpoint per bus (first in-service unit; v_init where no unit)."""
        return self._generation[2]

    @property
    def has_generator(self) -> np.ndarray:
        return self._generation[3]

    @cached_property
    def p_load(self) -> np.ndarray:
        return np.array([bus.p_load for bus in self.buses], dtype=float)

    @cached_property
    def q_load(self) -> np.ndarray:
        return np.array([bus.q_load for bus in self.buses], dtype=float)

    @cached_property
    def g_shunt(self) -> np.ndarray:
        return np.array([bus.g_shunt for bus in self.buses], dtype=float)

    @cached_property
    def b_shunt(self) -> np.ndarray:
        return np.array([bus.b_shunt for bus in self.buses], dtype=float)

    @cached_property
    def base_kv(self) -> np.ndarray:
        return np.array([bus.base_kv for bus in self.buses], dtype=float)

    @cached_property
    def kinds(self) -> tuple[BusKind, ...]:
        """Effective bus kinds: PV only where an in-service generator exists."""
        kinds = []
        for pos, bus in enumerate(self.buses):
            if bus.kind is BusKind.SLACK:
                kinds.append(BusKind.SLACK)
            elif bus.kind in (None, BusKind.PV) and self.has_generator[pos]:
                kinds.append(BusKind.PV)
            else:
                kinds.append(BusKind.PQ)
        return tuple(kinds)

    @cached_property
    def slack(self) -> int:
        """Position of the slack bus."""
        for pos, kind in enumerate(self.kinds):
            if kind is BusKind.SLACK:
                return pos
        raise ValueError("network has no slack bus")

    @cached_property
    def pv(self) -> np.ndarray:
        return np.array([p for p, k in enumerate(self.kinds) if k is BusKind.PV], dtype=int)

    @cached_property
    def pq(self) -> np.ndarray:
        return np.array([p for p, k in enumerate(self.kinds) if k is BusKind.PQ], dtype=int)

    @cached_property
    def pvpq(self) -> np.ndarray:
        """Non-slack bus positions in ascending order."""
        return np.array([p for p, k in enumerate(self.kinds) if k is not BusKind.SLACK], dtype=int)


def series_admittance(branch: Branch) -> tuple[float, float]:
    """Return (g, b) = 1/(r + jx)."""
    z2 = branch.r * branch.r + branch.x * branch.x
    if z2 == 0.0:
        raise InvalidBranch(f"branch {branch.from_bus}-{branch.to_bus} has zero impedance")
    return branch.r / z2, -branch.x / z2


def pi_equivalent(branch: Branch, *, allow_shift: bool = False) -> PiModel:
    """Normalize an off-nominal tap into a pi-equivalent.

    The phase shift is not represented in the result; callers passing
    ``allow_shift=True`` apply it themselves inside the trigonometric terms.
    """
    if branch.shift != 0.0 and not allow_shift:
        raise UnsupportedPhaseShift(
            f"branch {branch.from_bus}-{branch.to_bus} has phase shift {branch.shift} rad"
        )
    g, b = series_admittance(branch)
    y = complex(g, b)
    t = branch.tap
    half = branch.b_charging / 2.0
    series = y / t
    from_end = y * (1.0 - t) / (t * t) + 1j * half / (t * t)
    to_end = y * (t - 1.0) / t + 1j * half
    return PiModel(
        g=series.real,
        b=series.imag,
        g_from=from_end.real,
        b_from=from_end.imag,
        g_to=to_end.real,
        b_to=to_end.imag,
    )


def branch_arrays(network: Network, *, allow_shift: bool = False) -> BranchArrays:
    """Pi-equivalent parameters for every in-service branch, as arrays."""
    key = ("branch_arrays", allow_shift)
    cached = network._cache.get(key)
    if cached is not None:
        return cached
    active = network.active_branches
    branches = [network.branches[k] for k in active]
    pis = [pi_equivalent(br, allow_shift=allow_shift) for br in branches]
    arrays = BranchArrays(
        index=np.array(active, dtype=int),
        f=np.array([network.index[br.from_bus] for br in branches], dtype=int),
        t=np.array([network.index[br.to_bus] for br in branches], dtype=int),
        g=np.array([pi.g for pi in pis], dtype=float),
        b=np.array([pi.b for pi in pis], dtype=float),
        g_from=np.array([pi.g_from for pi in pis], dtype=float),
        b_from=np.array([pi.b_from for pi in pis], dtype=float),
        g_to=np.array([pi.g_to for pi in pis], dtype=float),
        b_to=np.array([pi.b_to for pi in pis], dtype=float),
        shift=np.array([br.shift for br in branches], dtype=float),
        x=np.array([br.x for br in branches], dtype=float),
        tap=np.array([br.tap for br in branches], dtype=float),
    )
    network._cache[key] = arrays
    return arrays


def validate(network: Network) -> list[str]:
    """Check every network invariant; violations are returned, never raised."""
    violations: list[str] = []
    violations.extend(_check_buses(network))
    violations.extend(_check_generators(network))
    violations.extend(_check_branches(network))
    if network.n_bus and not _is_connected(network):
        violations.append("network not connected")
    return violations


def _check_buses(network: Network) -> list[str]:
    problems: list[str] = []
    seen: set[int] = set()
    for bus in network.buses:
        if bus.id in seen:
            problems.append(f"duplicate bus id {bus.id}")
        seen.add(bus.id)
        if bus.id <= 0:
            problems.append(f"bus {bus.id}: id must be positive")
        if not bus.base_kv > 0:
            problems.append(f"bus {bus.id}: base_kv must be > 0")
        if not bus.v_init > 0:
            problems.append(f"bus {bus.id}: v_init must be > 0")
    slacks = [bus.id for bus in network.buses if bus.kind is BusKind.SLACK]
    if not slacks:
        problems.append("no slack bus")
    elif len(slacks) > 1:
        problems.append("multiple slack buses")
    elif not network.has_generator[network.index[slacks[0]]]:
        problems.append(f"slack bus {slacks[0]} has no in-service generator")
    return problems


def _check_generators(network: Network) -> list[str]:
    problems: list[str] = []
    setpoints: dict[int, float] = {}
    for k, gen in enumerate(network.generators, start=1):
        if gen.bus not in network.index:
            problems.append(f"generator {k}: unknown bus {gen.bus}")
            continue
        if gen.q_min > gen.q_max:
            problems.append(f"generator {k}: q_min exceeds q_max")
        if not gen.v_set > 0:
            problems.append(f"generator {k}: v_set must be > 0")
        if not gen.in_service:
            continue
        first = setpoints.setdefault(gen.bus, gen.v_set)
        if not math.isclose(first, gen.v_set, rel_tol=0.0, abs_tol=1e-9):
            problems.append(f"bus {gen.bus}: conflicting generator voltage setpoints")
    return problems


def _check_branches(network: Network) -> list[str]:
    problems: list[str] = []
    for k, br in enumerate(network.branches, start=1):
        if br.from_bus not in network.index:
            problems.append(f"branch {k}: unknown from-bus {br.from_bus}")
        if br.to_bus not in network.index:
            problems.append(f"branch {k}: unknown to-bus {br.to_bus}")
        if br.from_bus == br.to_bus:
            problems.append(f"branch {k}: from-bus equals to-bus")
        if br.r == 0.0 and br.x == 0.0:
            problems.append(f"branch {k}: zero impedance")
        if not br.tap > 0:
            problems.append(f"branch {k}: tap must be > 0")
    return problems


def _is_connected(network: Network) -> bool:
    rows, cols = [], []
    for br in network.branches:
        if not br.in_service:
            continue
        f, t = network.index.get(br.from_bus), network.index.get(br.to_bus)
        if f is None or t is None:
            continue
        rows.append(f)
        cols.append(t)
    n = network.n_bus
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    count, _ = connected_components(graph, directed=False)
    return count == 1
