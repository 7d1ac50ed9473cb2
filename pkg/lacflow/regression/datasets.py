"""Design matrices built from solved AC snapshots.

One observation per in-service branch per snapshot, from-side direction only. Columns are
the terms of the linearized flow equations so that the fitted coefficients drop straight
into the data-driven models.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from lacflow.exceptions import TopologyMismatch
from lacflow.grid.network import Network, branch_arrays
from lacflow.solvers.flows import SolvedState

INTERCEPT = "(Intercept)"

P_COLUMNS = ("theta_ij*b_ij", "(V_i-V_j)*g_ij")
Q_COLUMNS = ("V_i*b_sh", "theta_ij*g_ij", "(V_i-V_j)*b_ij")
DDC_COLUMNS = ("theta_ij/x_ij",)


@dataclass(frozen=True)
class DesignMatrix:
    """Regressors ``x`` (n x k), raw response ``y`` and a known per-row ``offset``.

    The fitted response is ``y - offset``.
    """

    x: np.ndarray
    y: np.ndarray
    names: tuple[str, ...]
    offset: Optional[np.ndarray] = None
    row_keys: tuple[str, ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x.reshape(-1, 1)
        y = np.asarray(self.y, dtype=float).ravel()
        offset = np.zeros_like(y) if self.offset is None else np.asarray(self.offset, dtype=float)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "offset", offset.ravel())
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "row_keys", tuple(self.row_keys))
        if x.shape[1] != len(self.names):
            raise ValueError(f"{x.shape[1]} columns but {len(self.names)} names")
        if len(set(self.names)) != len(self.names):
            raise ValueError("column names must be unique")
        if not (x.shape[0] == y.size == self.offset.size):
            raise ValueError("x, y and offset disagree on the number of rows")

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    @property
    def k(self) -> int:
        return int(self.x.shape[1])

    @property
    def response(self) -> np.ndarray:
        return self.y - self.offset

    @property
    def has_intercept(self) -> bool:
        return INTERCEPT in self.names

    def with_intercept(self) -> "DesignMatrix":
        if self.has_intercept:
            return self
        return DesignMatrix(
            x=np.column_stack([np.ones(self.n), self.x]),
            y=self.y,
            names=(INTERCEPT, *self.names),
            offset=self.offset,
            row_keys=self.row_keys,
            label=self.label,
        )


def _check_topology(network: Network, solutions: Sequence[SolvedState]) -> None:
    if not solutions:
        raise TopologyMismatch("at least one solution is required")
    active = np.asarray(network.active_branches, dtype=int)
    for pos, sol in enumerate(solutions):
        if np.asarray(sol.vm).size != network.n_bus:
            raise TopologyMismatch(
                f"solution {pos}: {np.asarray(sol.vm).size} buses, network has {network.n_bus}"
            )
        if not np.array_equal(np.asarray(sol.flows.branch, dtype=int), active):
            raise TopologyMismatch(f"solution {pos}: in-service branches differ from the network")


def _case_ids(solutions: Sequence[SolvedState], case_ids: Optional[Sequence[str]]) -> list[str]:
    if case_ids is not None:
        if len(case_ids) != len(solutions):
            raise ValueError("case_ids must match solutions one to one")
        return list(case_ids)
    return [f"case{pos + 1}" for pos in range(len(solutions))]


def _stack(
    network: Network,
    solutions: Sequence[SolvedState],
    case_ids: Optional[Sequence[str]],
    build,
    names: tuple[str, ...],
    label: str,
) -> DesignMatrix:
    _check_topology(network, solutions)
    arr = branch_arrays(network)
    xs, ys, offsets, keys = [], [], [], []
    for case, sol in zip(_case_ids(solutions, case_ids), solutions):
        vm, va = np.asarray(sol.vm, dtype=float), np.asarray(sol.va, dtype=float)
        cols, y, offset = build(arr, vm, va, sol.flows)
        xs.append(np.column_stack(cols))
        ys.append(y)
        offsets.append(offset)
        keys.extend(f"{case}:{int(k)}" for k in arr.index)
    return DesignMatrix(
        x=np.vstack(xs),
        y=np.concatenate(ys),
        names=names,
        offset=np.concatenate(offsets),
        row_keys=tuple(keys),
        label=label,
    )


def assemble_p_dataset(
    network: Network, solutions: Sequence[SolvedState], case_ids: Optional[Sequence[str]] = None
) -> DesignMatrix:
    """Active-flow regressors [-theta*b, (Vi-Vj)*g] against the AC from-side P."""

    def build(arr, vm, va, flows):
        theta = va[arr.f] - va[arr.t]
        vi, vj = vm[arr.f], vm[arr.t]
        cols = [-theta * arr.b, (vi - vj) * arr.g]
        return cols, flows.p_from, arr.g_from * (2.0 * vi - 1.0)

    return _stack(network, solutions, case_ids, build, P_COLUMNS, "P")


def assemble_q_dataset(
    network: Network, solutions: Sequence[SolvedState], case_ids: Optional[Sequence[str]] = None
) -> DesignMatrix:
    """Reactive-flow regressors with the per-branch charging constant as offset."""

    def build(arr, vm, va, flows):
        if flows.q_from is None:
            raise TopologyMismatch("reactive dataset needs solutions with reactive flows")
        theta = va[arr.f] - va[arr.t]
        vi, vj = vm[arr.f], vm[arr.t]
        cols = [-2.0 * vi * arr.b_from, -theta * arr.g, -(vi - vj) * arr.b]
        return cols, flows.q_from, arr.b_from.copy()

    return _stack(network, solutions, case_ids, build, Q_COLUMNS, "Q")


def assemble_ddc_dataset(
    network: Network, solutions: Sequence[SolvedState], case_ids: Optional[Sequence[str]] = None
) -> DesignMatrix:
    """Single regressor theta/(x*tap) against the AC from-side P."""

    def build(arr, vm, va, flows):
        theta = va[arr.f] - va[arr.t]
        return [theta / (arr.x * arr.tap)], flows.p_from, np.zeros(len(arr))

    return _stack(network, solutions, case_ids, build, DDC_COLUMNS, "DDC")
