"""Directional branch flows and the solution export format shared by every model."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Protocol

import numpy as np

from lacflow.constants import VALID_MODELS
from lacflow.exceptions import CaseParseError
from lacflow.types import FlowRecordDict, SolutionDict


@dataclass(frozen=True)
class BranchFlows:
    """Per in-service branch flows in per-unit.

    ``branch`` holds each row's index into ``Network.branches``. Reactive arrays are None
    for models that do not compute reactive power.
    """

    branch: np.ndarray
    p_from: np.ndarray
    p_to: np.ndarray
    q_from: Optional[np.ndarray] = None
    q_to: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.branch.size)

    @property
    def has_reactive(self) -> bool:
        return self.q_from is not None and self.q_to is not None

    @property
    def p_loss(self) -> np.ndarray:
        return self.p_from + self.p_to

    @property
    def s_from(self) -> np.ndarray:
        """From-side apparent power magnitude."""
        if self.q_from is None:
            raise ValueError("apparent power needs reactive flows")
        return np.hypot(self.p_from, self.q_from)


class SolvedState(Protocol):
    """What reports and regression need from any solution."""

    vm: np.ndarray
    va: np.ndarray
    flows: BranchFlows


@dataclass(frozen=True)
class StoredSolution:
    """A solution read back from its JSON export."""

    model: str
    case: str
    base_mva: float
    vm: np.ndarray
    va: np.ndarray
    p_inj: np.ndarray
    q_inj: Optional[np.ndarray]
    flows: BranchFlows
    iterations: int
    max_mismatch: float


def injections_from_flows(n_bus: int, f: np.ndarray, t: np.ndarray, flows: BranchFlows):
    """Sum directional flows into per-bus net injections (power delivered into branches)."""
    p_inj = np.zeros(n_bus)
    np.add.at(p_inj, f, flows.p_from)
    np.add.at(p_inj, t, flows.p_to)
    if not flows.has_reactive:
        return p_inj, None
    q_inj = np.zeros(n_bus)
    np.add.at(q_inj, f, flows.q_from)
    np.add.at(q_inj, t, flows.q_to)
    return p_inj, q_inj


def _flow_records(flows: BranchFlows, base_mva: float) -> list[FlowRecordDict]:
    records: list[FlowRecordDict] = []
    for row, k in enumerate(flows.branch):
        records.append(
            {
                "branch": int(k),
                "p_from_mw": float(flows.p_from[row] * base_mva),
                "q_from_mvar": None if flows.q_from is None else float(flows.q_from[row] * base_mva),
                "p_to_mw": float(flows.p_to[row] * base_mva),
                "q_to_mvar": None if flows.q_to is None else float(flows.q_to[row] * base_mva),
            }
        )
    return records


def solution_to_dict(solution: Any, *, model: str, case: str, base_mva: float) -> SolutionDict:
    """Serialize an AC or linear solution; flows in MW/MVAr, state in per-unit/radians."""
    q_inj = getattr(solution, "q_inj", None)
    return {
        "model": model,
        "case": case,
        "base_mva": float(base_mva),
        "vm": [float(v) for v in solution.vm],
        "va_rad": [float(a) for a in solution.va],
        "p_inj": [float(p) for p in solution.p_inj],
        "q_inj": None if q_inj is None else [float(q) for q in q_inj],
        "flows": _flow_records(solution.flows, base_mva),
        "iterations": int(getattr(solution, "iterations", 0)),
        "max_mismatch": float(getattr(solution, "max_mismatch", 0.0)),
    }


def solution_from_dict(payload: dict[str, Any]) -> StoredSolution:
    """Rebuild a solution from its exported form.

    Raises:
        CaseParseError: missing keys or an unknown model tag
    """
    try:
        model = payload["model"]
        base = float(payload["base_mva"])
        records = payload["flows"]
        has_q = bool(records) and records[0]["q_from_mvar"] is not None
        flows = BranchFlows(
            branch=np.array([r["branch"] for r in records], dtype=int),
            p_from=np.array([r["p_from_mw"] for r in records], dtype=float) / base,
            p_to=np.array([r["p_to_mw"] for r in records], dtype=float) / base,
            q_from=np.array([r["q_from_mvar"] for r in records], dtype=float) / base if has_q else None,
            q_to=np.array([r["q_to_mvar"] for r in records], dtype=float) / base if has_q else None,
        )
        q_inj = payload.get("q_inj")
        solution = StoredSolution(
            model=model,
            case=payload.get("case", ""),
            base_mva=base,
            vm=np.asarray(payload["vm"], dtype=float),
            va=np.asarray(payload["va_rad"], dtype=float),
            p_inj=np.asarray(payload["p_inj"], dtype=float),
            q_inj=None if q_inj is None else np.asarray(q_inj, dtype=float),
            flows=flows,
            iterations=int(payload.get("iterations", 0)),
            max_mismatch=float(payload.get("max_mismatch", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CaseParseError(f"malformed solution document: {exc}") from exc
    if model not in VALID_MODELS:
        raise CaseParseError(f"unknown model tag {model!r}", field="model")
    return solution
