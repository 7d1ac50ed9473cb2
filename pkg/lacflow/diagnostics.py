from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, TextIO

from lacflow.constants import VALID_DIAGNOSTIC_SEVERITIES
from lacflow.types import DiagnosticDict

Severity = str


@dataclass(frozen=True)
class Diagnostic:
    """A single diagnostic message with severity, code, and location.

    Attributes:
        severity: One of 'ERROR', 'WARN', 'INFO'
        code: Registered diagnostic code
        message: Human-readable message
        location: Optional case file, hour, or file:line reference
        origin: Optional originating component
    """

    severity: Severity
    code: str
    message: str
    location: Optional[str] = None
    origin: Optional[str] = None

    def __post_init__(self) -> None:
        if self.severity not in VALID_DIAGNOSTIC_SEVERITIES:
            raise ValueError(f"Invalid severity: {self.severity}")
        if not self.code or not self.code.strip():
            raise ValueError("code cannot be empty")
        if not self.message or not self.message.strip():
            raise ValueError("message cannot be empty")
        from lacflow.diagnostic_codes import is_valid_code

        if not is_valid_code(self.code):
            raise ValueError(f"Invalid diagnostic code: {self.code}")


@dataclass
class DiagnosticCollector:
    """Collects diagnostic messages during a command run."""

    diagnostics: List[Diagnostic] = field(default_factory=list)


_SEVERITY_ORDER = {"ERROR": 0, "WARN": 1, "INFO": 2}


def _dedupe_key(d: Diagnostic) -> tuple:
    return (d.severity, d.code, d.message, d.location, d.origin)


def add(
    collector: DiagnosticCollector,
    severity: Severity,
    code: str,
    message: str,
    location: Optional[str] = None,
    origin: Optional[str] = None,
) -> None:
    """Add a diagnostic to the collector, skipping exact duplicates."""
    diagnostic = Diagnostic(severity, code, message, location, origin)
    if _dedupe_key(diagnostic) in {_dedupe_key(d) for d in collector.diagnostics}:
        return
    collector.diagnostics.append(diagnostic)


def add_exception(
    collector: DiagnosticCollector,
    exc: Exception,
    *,
    location: Optional[str] = None,
    severity: Severity = "ERROR",
) -> None:
    """Record an exception under its registered code (CLI_UNHANDLED for foreign ones)."""
    code = getattr(exc, "code", "CLI_UNHANDLED")
    message = str(exc) or type(exc).__name__
    if code == "CLI_UNHANDLED":
        message = f"Unhandled exception: {message}"
    add(collector, severity, code, message, location, origin=type(exc).__name__)


def extend(collector: DiagnosticCollector, items: Iterable[Diagnostic]) -> None:
    for item in items:
        add(collector, item.severity, item.code, item.message, item.location, item.origin)


def has_errors(collector: DiagnosticCollector) -> bool:
    return any(d.severity == "ERROR" for d in collector.diagnostics)


def to_console(collector: DiagnosticCollector, *, stream: TextIO, verbose: bool) -> None:
    """Write diagnostics to a stream in human-readable form, errors first."""
    ordered = sorted(
        collector.diagnostics,
        key=lambda d: (_SEVERITY_ORDER.get(d.severity, 99), d.code, d.message),
    )
    for diag in ordered:
        text = f"[{diag.severity}] {diag.code}: {diag.message}"
        if diag.location:
            text += f" ({diag.location})"
        if verbose and diag.origin:
            text += f" [{diag.origin}]"
        stream.write(text + "\n")


def to_payload(collector: DiagnosticCollector) -> list[DiagnosticDict]:
    return [
        {
            "severity": d.severity,
            "code": d.code,
            "message": d.message,
            "location": d.location or "",
            "origin": d.origin or "",
        }
        for d in collector.diagnostics
    ]


def to_json(collector: DiagnosticCollector) -> str:
    """Serialize diagnostics to JSON with stable key ordering."""
    return json.dumps(to_payload(collector), sort_keys=True)


def exit_code(collector: DiagnosticCollector) -> int:
    """Exit code for the collected diagnostics (see lacflow.exit_codes)."""
    from lacflow.exit_codes import get_exit_code

    return get_exit_code(collector)
