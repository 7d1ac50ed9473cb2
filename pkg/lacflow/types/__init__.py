"""Type definitions for lacflow.

TypedDicts describing the JSON payloads lacflow reads and writes.
"""

from __future__ import annotations

from typing import Optional, TypedDict


class DiagnosticDict(TypedDict, total=False):
    """Typed dictionary for diagnostic message payloads."""

    severity: str
    code: str
    message: str
    location: Optional[str]
    origin: Optional[str]


class FlowRecordDict(TypedDict):
    """One exported branch flow record in physical units."""

    branch: int
    p_from_mw: float
    q_from_mvar: Optional[float]
    p_to_mw: float
    q_to_mvar: Optional[float]


class SolutionDict(TypedDict, total=False):
    """Exported AC or linear-model solution."""

    model: str
    case: str
    base_mva: float
    vm: list[float]
    va_rad: list[float]
    p_inj: list[float]
    q_inj: Optional[list[float]]
    flows: list[FlowRecordDict]
    iterations: int
    max_mismatch: float


class CoefficientsDict(TypedDict, total=False):
    """Exported model coefficients."""

    k_d: float
    k_a: list[float]
    trained_on: list[str]
    fit_stats_ref: Optional[str]
    provenance: dict


__all__ = ["DiagnosticDict", "FlowRecordDict", "SolutionDict", "CoefficientsDict"]
