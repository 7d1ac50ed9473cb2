"""Central validation helpers for user-provided inputs."""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from lacflow.diagnostics import DiagnosticCollector, add

MAX_INPUT_LENGTH = 4096
MAX_CONFIG_BYTES = 2 * 1024 * 1024


def _record_error(
    code: str, diagnostics: DiagnosticCollector, message: str, location: Optional[str] = None
) -> None:
    add(diagnostics, "ERROR", code, message, location)


def validate_cli_args(cli_args, diagnostics: DiagnosticCollector) -> None:
    """Check path arguments and numeric flags before any work starts."""
    for name in ("case", "cases_dir", "base", "source", "out", "out_dir", "coeffs", "config_path", "log_file"):
        value = getattr(cli_args, name, None)
        if value is not None:
            _validate_path_field(value, name, diagnostics)
    for value in getattr(cli_args, "train", None) or ():
        _validate_path_field(value, "train", diagnostics)
    threads = getattr(cli_args, "threads", None)
    if threads is not None and threads < 1:
        _record_error("VALIDATION_INVALID_VALUE", diagnostics, "threads must be >= 1")
    hours = getattr(cli_args, "hours", None)
    if hours is not None and hours < 1:
        _record_error("VALIDATION_INVALID_VALUE", diagnostics, "hours must be >= 1")


def _validate_path_field(value, field: str, diagnostics: DiagnosticCollector) -> None:
    text = str(value)
    if not text.strip():
        _record_error("VALIDATION_PATH", diagnostics, f"{field} cannot be empty")
    elif len(text) > MAX_INPUT_LENGTH:
        _record_error(
            "VALIDATION_PATH", diagnostics, f"{field} exceeds maximum length ({MAX_INPUT_LENGTH})", text
        )
    elif "\x00" in text:
        _record_error("VALIDATION_PATH", diagnostics, f"{field} contains a NUL byte", text)


def enforce_size_limit(
    text: str,
    path: Path,
    diagnostics: DiagnosticCollector,
    *,
    max_bytes: int = MAX_CONFIG_BYTES,
    code: str = "CONFIG_TOO_LARGE",
) -> bool:
    """Ensure a text blob does not exceed a byte threshold."""
    size = len(text.encode("utf-8", errors="ignore"))
    if size > max_bytes:
        _record_error(
            code, diagnostics, f"{path} exceeds allowed size ({size} bytes > {max_bytes} bytes)", str(path)
        )
        return False
    return True
