"""DC and linearized AC network models.

Both families are one sparse direct solve: no iteration, no AC state involved. With
identity coefficients the DC family is the classic B-theta model and the LAC family the
first-order expansion of the pi-model flow equations around V=1, theta=0.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from lacflow.constants import DEFAULT_REFINE_PASSES, DEFAULT_REFINE_TOL
from lacflow.exceptions import SingularSystem
from lacflow.grid.network import BranchArrays, BusKind, Network, branch_arrays
from lacflow.solvers.coefficients import ModelCoefficients
from lacflow.solvers.flows import BranchFlows, injections_from_flows

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearSolution:
    """Solved state of a DC- or LAC-family model.

    The DC family reports ``vm`` as ones and leaves the reactive fields None.
    ``q_balance`` is the reactive generation each PV/slack bus must supply.
    """

    model: str
    vm: np.ndarray
    va: np.ndarray
    p_inj: np.ndarray
    q_inj: Optional[np.ndarray]
    flows: BranchFlows
    slack_p: float
    q_balance: Optional[dict[int, float]]
    max_mismatch: float
    iterations: int = 0


def solve_sparse(
    matrix: sparse.spmatrix,
    rhs: np.ndarray,
    *,
    refine_tol: float = DEFAULT_REFINE_TOL,
    refine_passes: int = DEFAULT_REFINE_PASSES,
) -> np.ndarray:
    """LU solve followed by iterative refinement of the residual.

    Raises:
        SingularSystem: factorization failed or produced non-finite values
    """
    if rhs.size == 0:
        return np.zeros(0)
    a = sparse.csc_matrix(matrix)
    try:
        lu = splu(a)
    except RuntimeError as exc:
        raise SingularSystem(f"network matrix is singular: {exc}") from exc
    x = lu.solve(rhs)
    for _ in range(refine_passes):
        residual = rhs - a @ x
        if np.max(np.abs(residual)) < refine_tol:
            break
        x = x + lu.solve(residual)
    if not np.all(np.isfinite(x)):
        raise SingularSystem("network matrix solve produced non-finite values")
    return x


def _laplacian(n: int, f: np.ndarray, t: np.ndarray, w: np.ndarray) -> sparse.csr_matrix:
    rows = np.concatenate([f, t, f, t])
    cols = np.concatenate([f, t, t, f])
    data = np.concatenate([w, w, -w, -w])
    return sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def _diag(n: int, idx: np.ndarray, values: np.ndarray) -> sparse.csr_matrix:
    return sparse.coo_matrix((values, (idx, idx)), shape=(n, n)).tocsr()


# -- DC family ---------------------------------------------------------------------------


def dc_weights(arr: BranchArrays) -> np.ndarray:
    """Per-branch DC susceptance 1/(x*tap)."""
    if np.any(arr.x == 0.0):
        k = int(arr.index[np.argmax(arr.x == 0.0)])
        raise SingularSystem(f"branch {k + 1} has zero reactance")
    return 1.0 / (arr.x * arr.tap)


def solve_dc_family(
    network: Network,
    k_d: float = 1.0,
    *,
    refine_tol: float = DEFAULT_REFINE_TOL,
    refine_passes: int = DEFAULT_REFINE_PASSES,
    model: Optional[str] = None,
) -> LinearSolution:
    """DC power flow with flows scaled by ``k_d`` (k_d = 1 is plain DC).

    Angles come out divided by ``k_d``; branch flows do not depend on it.
    """
    arr = branch_arrays(network)
    n = network.n_bus
    w = dc_weights(arr)
    b_bus = _laplacian(n, arr.f, arr.t, w)
    pvpq = network.pvpq
    p_net = network.p_gen - network.p_load
    reduced = b_bus[pvpq][:, pvpq]
    va = np.zeros(n)
    va[pvpq] = solve_sparse(
        reduced, p_net[pvpq], refine_tol=refine_tol, refine_passes=refine_passes
    ) / k_d
    p_from = k_d * (va[arr.f] - va[arr.t]) * w
    flows = BranchFlows(branch=arr.index, p_from=p_from, p_to=-p_from)
    p_inj, _ = injections_from_flows(n, arr.f, arr.t, flows)
    residual = float(np.max(np.abs(p_inj[pvpq] - p_net[pvpq]))) if pvpq.size else 0.0
    slack = network.slack
    return LinearSolution(
        model=model or ("dc" if k_d == 1.0 else "ddc"),
        vm=np.ones(n),
        va=va,
        p_inj=p_inj,
        q_inj=None,
        flows=flows,
        slack_p=float(p_inj[slack] + network.p_load[slack]),
        q_balance=None,
        max_mismatch=residual,
    )


# -- LAC family --------------------------------------------------------------------------


def eval_flows_lac(
    network: Network,
    vm: np.ndarray,
    va: np.ndarray,
    coeffs: Optional[ModelCoefficients] = None,
) -> BranchFlows:
    """Linearized directional flows at a given state."""
    k1, k2, k3, k4, k5 = (coeffs or ModelCoefficients.identity()).k_a
    arr = branch_arrays(network)
    vi, vj = vm[arr.f], vm[arr.t]
    theta = va[arr.f] - va[arr.t]
    dv = vi - vj
    g, b = arr.g, arr.b
    p_from = -k1 * theta * b + k2 * dv * g + arr.g_from * (2.0 * vi - 1.0)
    p_to = k1 * theta * b - k2 * dv * g + arr.g_to * (2.0 * vj - 1.0)
    q_from = arr.b_from - 2.0 * k3 * vi * arr.b_from - k4 * theta * g - k5 * dv * b
    q_to = arr.b_to - 2.0 * k3 * vj * arr.b_to + k4 * theta * g + k5 * dv * b
    return BranchFlows(branch=arr.index, p_from=p_from, p_to=p_to, q_from=q_from, q_to=q_to)


@dataclass(frozen=True)
class _LacOperator:
    """Bus outflow as an affine map of (theta, V) over all buses."""

    p_theta: sparse.csr_matrix
    p_v: sparse.csr_matrix
    p_const: np.ndarray
    q_theta: sparse.csr_matrix
    q_v: sparse.csr_matrix
    q_const: np.ndarray


def _lac_operator(network: Network, coeffs: ModelCoefficients) -> _LacOperator:
    k1, k2, k3, k4, k5 = coeffs.k_a
    arr = branch_arrays(network)
    n = network.n_bus
    buses = np.arange(n)
    f, t = arr.f, arr.t
    p_v = (
        _laplacian(n, f, t, k2 * arr.g)
        + _diag(n, f, 2.0 * arr.g_from)
        + _diag(n, t, 2.0 * arr.g_to)
        + _diag(n, buses, 2.0 * network.g_shunt)
    )
    q_v = (
        _laplacian(n, f, t, -k5 * arr.b)
        + _diag(n, f, -2.0 * k3 * arr.b_from)
        + _diag(n, t, -2.0 * k3 * arr.b_to)
        + _diag(n, buses, -2.0 * network.b_shunt)
    )
    p_const = -network.g_shunt.copy()
    np.add.at(p_const, f, -arr.g_from)
    np.add.at(p_const, t, -arr.g_to)
    q_const = network.b_shunt.copy()
    np.add.at(q_const, f, arr.b_from)
    np.add.at(q_const, t, arr.b_to)
    return _LacOperator(
        p_theta=_laplacian(n, f, t, -k1 * arr.b),
        p_v=p_v.tocsr(),
        p_const=p_const,
        q_theta=_laplacian(n, f, t, -k4 * arr.g),
        q_v=q_v.tocsr(),
        q_const=q_const,
    )


def solve_lac_family(
    network: Network,
    coeffs: Optional[ModelCoefficients] = None,
    *,
    refine_tol: float = DEFAULT_REFINE_TOL,
    refine_passes: int = DEFAULT_REFINE_PASSES,
    model: Optional[str] = None,
) -> LinearSolution:
    """Solve the linearized AC model as a single sparse system in (theta, V).

    Unknowns are theta at non-slack buses and V at PQ buses. PV and slack buses hold V at
    their setpoint; the slack angle is zero.

    Raises:
        SingularSystem: the assembled system cannot be factorized
        UnsupportedPhaseShift: a branch carries a phase shift
    """
    coeffs = coeffs or ModelCoefficients.identity()
    op = _lac_operator(network, coeffs)
    n = network.n_bus
    pvpq, pq = network.pvpq, network.pq
    known_v = np.array([p for p, k in enumerate(network.kinds) if k is not BusKind.PQ], dtype=int)
    v_known = network.v_set[known_v]

    matrix = sparse.bmat(
        [
            [op.p_theta[pvpq][:, pvpq], op.p_v[pvpq][:, pq]],
            [op.q_theta[pq][:, pvpq], op.q_v[pq][:, pq]],
        ],
        format="csc",
    )
    p_net = network.p_gen - network.p_load
    q_net = network.q_gen - network.q_load
    rhs = np.concatenate(
        [
            p_net[pvpq] - op.p_const[pvpq] - op.p_v[pvpq][:, known_v] @ v_known,
            q_net[pq] - op.q_const[pq] - op.q_v[pq][:, known_v] @ v_known,
        ]
    )
    x = solve_sparse(matrix, rhs, refine_tol=refine_tol, refine_passes=refine_passes)

    va = np.zeros(n)
    vm = np.zeros(n)
    va[pvpq] = x[: pvpq.size]
    vm[pq] = x[pvpq.size :]
    vm[known_v] = v_known

    flows = eval_flows_lac(network, vm, va, coeffs)
    arr = branch_arrays(network)
    p_inj, q_inj = injections_from_flows(n, arr.f, arr.t, flows)
    p_shunt = (2.0 * vm - 1.0) * network.g_shunt
    q_shunt = -(2.0 * vm - 1.0) * network.b_shunt
    p_res = p_inj[pvpq] + p_shunt[pvpq] - p_net[pvpq]
    q_res = q_inj[pq] + q_shunt[pq] - q_net[pq]
    residual = float(np.max(np.abs(np.concatenate([p_res, q_res])))) if x.size else 0.0
    q_needed = q_inj + q_shunt + network.q_load
    slack = network.slack
    logger.debug("LAC system solved", extra={"unknowns": int(x.size), "residual": residual})
    return LinearSolution(
        model=model or ("lac" if coeffs.is_identity else "dlac"),
        vm=vm,
        va=va,
        p_inj=p_inj,
        q_inj=q_inj,
        flows=flows,
        slack_p=float(p_inj[slack] + p_shunt[slack] + network.p_load[slack]),
        q_balance={int(network.bus_ids[p]): float(q_needed[p]) for p in known_v},
        max_mismatch=residual,
    )
