"""Full AC power flow by Newton-Raphson in polar coordinates.

The converged state is the reference every linear model is scored against, so the
solver favours accuracy: full analytic Jacobian, sparse LU each iteration, infinity-norm
mismatch certificate recomputed from the returned voltages.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from lacflow.constants import (
    DEFAULT_AC_MAX_ITER,
    DEFAULT_AC_TOL,
    DEFAULT_Q_LIMIT_ROUNDS,
    DIVERGENCE_MISMATCH,
)
from lacflow.exceptions import Divergence, SingularJacobian
from lacflow.grid.network import BusKind, Network, branch_arrays
from lacflow.solvers.flows import BranchFlows

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AcOptions:
    tol: float = DEFAULT_AC_TOL
    max_iter: int = DEFAULT_AC_MAX_ITER
    flat_start: bool = True
    enforce_q_limits: bool = False
    max_q_rounds: int = DEFAULT_Q_LIMIT_ROUNDS

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class AcSolution:
    """Converged AC operating point.

    ``p_inj``/``q_inj`` are the power each bus delivers into its branches (generation minus
    load minus shunt consumption), so their sum equals the total branch losses.
    """

    vm: np.ndarray
    va: np.ndarray
    p_inj: np.ndarray
    q_inj: np.ndarray
    p_gen: np.ndarray
    q_gen: np.ndarray
    flows: BranchFlows
    iterations: int
    max_mismatch: float
    mismatch_history: tuple[float, ...] = ()
    converged_from: str = "flat"
    switched_to_pq: tuple[int, ...] = field(default=())


def build_ybus(network: Network) -> sparse.csr_matrix:
    """Complex bus admittance matrix, phase shifters and bus shunts included."""
    arr = branch_arrays(network, allow_shift=True)
    n = network.n_bus
    y_series = arr.g + 1j * arr.b
    y_ff = y_series + (arr.g_from + 1j * arr.b_from)
    y_tt = y_series + (arr.g_to + 1j * arr.b_to)
    y_ft = -y_series * np.exp(1j * arr.shift)
    y_tf = -y_series * np.exp(-1j * arr.shift)
    rows = np.concatenate([arr.f, arr.t, arr.f, arr.t, np.arange(n)])
    cols = np.concatenate([arr.f, arr.t, arr.t, arr.f, np.arange(n)])
    data = np.concatenate([y_ff, y_tt, y_ft, y_tf, network.g_shunt + 1j * network.b_shunt])
    return sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def compute_branch_flows_ac(network: Network, vm: np.ndarray, va: np.ndarray) -> BranchFlows:
    """Directional pi-model flows, with any phase shift applied inside the angles."""
    arr = branch_arrays(network, allow_shift=True)
    vi, vj = vm[arr.f], vm[arr.t]
    theta = va[arr.f] - va[arr.t]
    alpha = theta - arr.shift
    beta = -theta + arr.shift
    g, b = arr.g, arr.b
    vivj = vi * vj
    # Series terms grouped as V_i^2 - V_i V_j cos so they vanish exactly at a flat state.
    drop_from = vi**2 - vivj * np.cos(alpha)
    drop_to = vj**2 - vivj * np.cos(beta)
    p_from = vi**2 * arr.g_from + g * drop_from - b * vivj * np.sin(alpha)
    q_from = -(vi**2) * arr.b_from - b * drop_from - g * vivj * np.sin(alpha)
    p_to = vj**2 * arr.g_to + g * drop_to - b * vivj * np.sin(beta)
    q_to = -(vj**2) * arr.b_to - b * drop_to - g * vivj * np.sin(beta)
    return BranchFlows(branch=arr.index, p_from=p_from, p_to=p_to, q_from=q_from, q_to=q_to)


def _complex_power(ybus: sparse.csr_matrix, v: np.ndarray) -> np.ndarray:
    return v * np.conj(ybus @ v)


def _mismatch(
    ybus: sparse.csr_matrix, v: np.ndarray, s_spec: np.ndarray, pvpq: np.ndarray, pq: np.ndarray
) -> np.ndarray:
    mis = _complex_power(ybus, v) - s_spec
    return np.concatenate([mis[pvpq].real, mis[pq].imag])


def _inf_norm(f: np.ndarray) -> float:
    return float(np.max(np.abs(f))) if f.size else 0.0


def _jacobian(
    ybus: sparse.csr_matrix, v: np.ndarray, pvpq: np.ndarray, pq: np.ndarray
) -> sparse.csc_matrix:
    ibus = ybus @ v
    diag_v = sparse.diags(v)
    diag_i = sparse.diags(ibus)
    diag_vnorm = sparse.diags(v / np.abs(v))
    ds_dvm = (diag_v @ (ybus @ diag_vnorm).conj() + diag_i.conj() @ diag_vnorm).tocsr()
    ds_dva = (1j * diag_v @ (diag_i - ybus @ diag_v).conj()).tocsr()
    j11 = ds_dva[pvpq][:, pvpq].real
    j12 = ds_dvm[pvpq][:, pq].real
    j21 = ds_dva[pq][:, pvpq].imag
    j22 = ds_dvm[pq][:, pq].imag
    return sparse.bmat([[j11, j12], [j21, j22]], format="csc")


def power_mismatch(network: Network, vm: np.ndarray, va: np.ndarray) -> float:
    """Infinity-norm nodal mismatch of a state against the case's scheduled injections."""
    ybus = build_ybus(network)
    v = vm * np.exp(1j * va)
    s_spec = (network.p_gen - network.p_load) + 1j * (network.q_gen - network.q_load)
    return _inf_norm(_mismatch(ybus, v, s_spec, network.pvpq, network.pq))


def _initial_state(
    network: Network, options: AcOptions, start: Optional[AcSolution]
) -> tuple[np.ndarray, np.ndarray, str]:
    fixed_v = np.array([k is not BusKind.PQ for k in network.kinds])
    if start is not None:
        vm, va, origin = start.vm.astype(float).copy(), start.va.astype(float).copy(), "warm"
    elif options.flat_start:
        vm, va, origin = np.ones(network.n_bus), np.zeros(network.n_bus), "flat"
    else:
        vm = np.array([bus.v_init for bus in network.buses], dtype=float)
        va = np.array([bus.a_init for bus in network.buses], dtype=float)
        origin = "warm"
    vm[fixed_v] = network.v_set[fixed_v]
    va = va - va[network.slack]
    return vm, va, origin


def _newton(
    ybus: sparse.csr_matrix,
    vm: np.ndarray,
    va: np.ndarray,
    s_spec: np.ndarray,
    pvpq: np.ndarray,
    pq: np.ndarray,
    options: AcOptions,
) -> tuple[np.ndarray, np.ndarray, int, list[float]]:
    npvpq = pvpq.size
    v = vm * np.exp(1j * va)
    f = _mismatch(ybus, v, s_spec, pvpq, pq)
    history = [_inf_norm(f)]
    logger.debug("newton start", extra={"mismatch": history[0]})
    iteration = 0
    while history[-1] > options.tol:
        if iteration >= options.max_iter:
            raise Divergence(iteration, history[-1])
        iteration += 1
        jac = _jacobian(ybus, v, pvpq, pq)
        try:
            dx = -splu(jac).solve(f)
        except RuntimeError as exc:
            raise SingularJacobian(iteration) from exc
        if not np.all(np.isfinite(dx)):
            raise Divergence(iteration, history[-1])
        va[pvpq] += dx[:npvpq]
        vm[pq] += dx[npvpq:]
        v = vm * np.exp(1j * va)
        f = _mismatch(ybus, v, s_spec, pvpq, pq)
        norm = _inf_norm(f)
        history.append(norm)
        logger.debug("newton iteration", extra={"iteration": iteration, "mismatch": norm})
        if not np.isfinite(norm) or norm > DIVERGENCE_MISMATCH:
            raise Divergence(iteration, norm)
    return vm, va, iteration, history


def _q_limits(network: Network) -> tuple[np.ndarray, np.ndarray]:
    q_min = np.zeros(network.n_bus)
    q_max = np.zeros(network.n_bus)
    for gen in network.generators:
        pos = network.index.get(gen.bus)
        if pos is not None and gen.in_service:
            q_min[pos] += gen.q_min
            q_max[pos] += gen.q_max
    return q_min, q_max


def solve_ac(
    network: Network,
    options: Optional[AcOptions] = None,
    *,
    start: Optional[AcSolution] = None,
) -> AcSolution:
    """Solve the AC power flow.

    Args:
        network: validated network with one slack bus
        options: solver settings (defaults when omitted)
        start: previous solution used as a warm start

    Raises:
        Divergence: mismatch not below ``tol`` within ``max_iter`` iterations or blowing up
        SingularJacobian: Jacobian factorization failed
    """
    options = options or AcOptions()
    ybus = build_ybus(network)
    vm, va, origin = _initial_state(network, options, start)
    pv = network.pv.copy()
    pq = network.pq.copy()
    pvpq = network.pvpq
    q_gen = network.q_gen.copy()
    s_spec = (network.p_gen - network.p_load) + 1j * (q_gen - network.q_load)
    q_min, q_max = _q_limits(network)
    switched: list[int] = []
    total_iterations = 0
    history: list[float] = []

    rounds = options.max_q_rounds if options.enforce_q_limits else 0
    for round_no in range(rounds + 1):
        vm, va, iterations, round_history = _newton(ybus, vm, va, s_spec, pvpq, pq, options)
        total_iterations += iterations
        history.extend(round_history if not history else round_history[1:])
        if round_no == rounds:
            break
        s_calc = _complex_power(ybus, vm * np.exp(1j * va))
        q_needed = s_calc.imag + network.q_load
        over = pv[q_needed[pv] > q_max[pv]]
        under = pv[q_needed[pv] < q_min[pv]]
        if not over.size and not under.size:
            break
        q_gen[over] = q_max[over]
        q_gen[under] = q_min[under]
        moved = np.concatenate([over, under])
        switched.extend(int(network.bus_ids[p]) for p in moved)
        pv = np.setdiff1d(pv, moved)
        pq = np.union1d(pq, moved)
        s_spec = (network.p_gen - network.p_load) + 1j * (q_gen - network.q_load)
        logger.info("PV buses switched to PQ", extra={"buses": sorted(switched)})

    v = vm * np.exp(1j * va)
    max_mismatch = _inf_norm(_mismatch(ybus, v, s_spec, pvpq, pq))
    s_calc = _complex_power(ybus, v)
    vm2 = vm * vm
    solution = AcSolution(
        vm=vm,
        va=va,
        p_inj=s_calc.real - vm2 * network.g_shunt,
        q_inj=s_calc.imag + vm2 * network.b_shunt,
        p_gen=s_calc.real + network.p_load,
        q_gen=s_calc.imag + network.q_load,
        flows=compute_branch_flows_ac(network, vm, va),
        iterations=total_iterations,
        max_mismatch=max_mismatch,
        mismatch_history=tuple(history),
        converged_from=origin,
        switched_to_pq=tuple(sorted(switched)),
    )
    logger.info(
        "AC power flow converged",
        extra={"iterations": total_iterations, "max_mismatch": max_mismatch, "start": origin},
    )
    return solution
