"""Registry of diagnostic codes used throughout lacflow.

Every code a Diagnostic may carry is declared in ``DiagnosticCode`` and described in the
metadata registry; the two are cross-checked on import.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional


@dataclass(frozen=True)
class DiagnosticMetadata:
    """Metadata associated with a diagnostic code.

    Attributes:
        code: The diagnostic code string (e.g., 'AC_DIVERGENCE')
        category: Category grouping (e.g., 'CASE', 'SOLVER')
        default_severity: Default severity level for this code
        description: Human-readable description of when this code is used
        message_template: Optional template for the message
    """

    code: str
    category: str
    default_severity: str
    description: str
    message_template: Optional[str] = None

    def __post_init__(self) -> None:
        if self.default_severity not in {"ERROR", "WARN", "INFO"}:
            raise ValueError(f"Invalid severity: {self.default_severity}")


class DiagnosticCode(str, Enum):
    """Enumeration of all valid diagnostic codes."""

    TEST = "TEST"

    # CLI
    CLI_UNHANDLED = "CLI_UNHANDLED"
    CLI_USAGE = "CLI_USAGE"
    COEFFS_REQUIRED = "COEFFS_REQUIRED"
    COEFFS_INVALID = "COEFFS_INVALID"
    REPORT_WRITE_FAIL = "REPORT_WRITE_FAIL"
    REPORT_SERIALIZE_FAIL = "REPORT_SERIALIZE_FAIL"

    # Config
    CONFIG_MISSING = "CONFIG_MISSING"
    CONFIG_READ_FAIL = "CONFIG_READ_FAIL"
    CONFIG_PARSE_ERROR = "CONFIG_PARSE_ERROR"
    CONFIG_SCHEMA_VALIDATION = "CONFIG_SCHEMA_VALIDATION"
    CONFIG_SCHEMA_ERROR = "CONFIG_SCHEMA_ERROR"
    CONFIG_VALIDATION_ERROR = "CONFIG_VALIDATION_ERROR"
    CONFIG_UNKNOWN_KEY = "CONFIG_UNKNOWN_KEY"
    CONFIG_TOO_LARGE = "CONFIG_TOO_LARGE"

    # Case files
    CASE_MISSING = "CASE_MISSING"
    CASE_PARSE_ERROR = "CASE_PARSE_ERROR"
    CASE_INVALID = "CASE_INVALID"
    CASE_UNSUPPORTED_SECTION = "CASE_UNSUPPORTED_SECTION"

    # Solvers and regression
    AC_DIVERGENCE = "AC_DIVERGENCE"
    AC_SINGULAR_JACOBIAN = "AC_SINGULAR_JACOBIAN"
    LINEAR_SINGULAR_SYSTEM = "LINEAR_SINGULAR_SYSTEM"
    PHASE_SHIFT_UNSUPPORTED = "PHASE_SHIFT_UNSUPPORTED"
    REGRESSION_RANK_DEFICIENT = "REGRESSION_RANK_DEFICIENT"
    REGRESSION_COLLINEAR = "REGRESSION_COLLINEAR"
    NUMERICAL_ERROR = "NUMERICAL_ERROR"

    # Evaluation runs
    HOUR_INFEASIBLE = "HOUR_INFEASIBLE"
    HOUR_FAILED = "HOUR_FAILED"
    EVAL_NO_HOURS = "EVAL_NO_HOURS"

    # Input validation
    VALIDATION_PATH = "VALIDATION_PATH"
    VALIDATION_INVALID_VALUE = "VALIDATION_INVALID_VALUE"


def _meta(
    code: str, category: str, severity: str, description: str, template: Optional[str] = None
) -> tuple[str, DiagnosticMetadata]:
    return code, DiagnosticMetadata(code, category, severity, description, template)


_METADATA_REGISTRY: dict[str, DiagnosticMetadata] = dict(
    [
        _meta("TEST", "TEST", "INFO", "Test diagnostic code"),
        _meta("CLI_UNHANDLED", "CLI", "ERROR", "Unhandled exception in CLI", "Unhandled exception: {error}"),
        _meta("CLI_USAGE", "CLI", "ERROR", "Invalid command-line usage"),
        _meta(
            "COEFFS_REQUIRED",
            "CLI",
            "ERROR",
            "A data-driven model was requested without a coefficients file",
            "coefficients required for model {model}",
        ),
        _meta("COEFFS_INVALID", "CLI", "ERROR", "Coefficients file missing, unreadable or malformed"),
        _meta("REPORT_WRITE_FAIL", "CLI", "ERROR", "Failed to write an output artifact"),
        _meta("REPORT_SERIALIZE_FAIL", "CLI", "ERROR", "Failed to serialize an output artifact"),
        _meta("CONFIG_MISSING", "CONFIG", "ERROR", "Configuration file not found"),
        _meta("CONFIG_READ_FAIL", "CONFIG", "ERROR", "Configuration file cannot be read"),
        _meta("CONFIG_PARSE_ERROR", "CONFIG", "ERROR", "Configuration file is not valid YAML"),
        _meta("CONFIG_SCHEMA_VALIDATION", "CONFIG", "ERROR", "Configuration failed schema validation"),
        _meta("CONFIG_SCHEMA_ERROR", "CONFIG", "ERROR", "Bundled schema is itself invalid"),
        _meta("CONFIG_VALIDATION_ERROR", "CONFIG", "ERROR", "Configuration values violate constraints"),
        _meta("CONFIG_UNKNOWN_KEY", "CONFIG", "WARN", "Unknown configuration key"),
        _meta("CONFIG_TOO_LARGE", "CONFIG", "ERROR", "Configuration file exceeds the size limit"),
        _meta("CASE_MISSING", "CASE", "ERROR", "Case file not found"),
        _meta("CASE_PARSE_ERROR", "CASE", "ERROR", "Case file cannot be parsed"),
        _meta("CASE_INVALID", "CASE", "ERROR", "Case violates a network invariant"),
        _meta(
            "CASE_UNSUPPORTED_SECTION",
            "CASE",
            "WARN",
            "Case data section ignored by the importer",
            "unsupported section {name} ignored",
        ),
        _meta("AC_DIVERGENCE", "SOLVER", "ERROR", "Newton-Raphson did not converge"),
        _meta("AC_SINGULAR_JACOBIAN", "SOLVER", "ERROR", "Newton-Raphson Jacobian is singular"),
        _meta("LINEAR_SINGULAR_SYSTEM", "SOLVER", "ERROR", "Linear model system is singular"),
        _meta(
            "PHASE_SHIFT_UNSUPPORTED",
            "SOLVER",
            "ERROR",
            "Linear models do not support phase-shifting transformers",
        ),
        _meta("REGRESSION_RANK_DEFICIENT", "REGRESSION", "ERROR", "Design matrix is rank deficient"),
        _meta("REGRESSION_COLLINEAR", "REGRESSION", "WARN", "Variance inflation factor above threshold"),
        _meta("NUMERICAL_ERROR", "REGRESSION", "ERROR", "Non-finite numerical result"),
        _meta("HOUR_INFEASIBLE", "EVAL", "WARN", "Hourly case has no AC solution"),
        _meta("HOUR_FAILED", "EVAL", "WARN", "Hourly evaluation failed"),
        _meta("EVAL_NO_HOURS", "EVAL", "ERROR", "No hour could be evaluated"),
        _meta("VALIDATION_PATH", "VALIDATION", "ERROR", "Invalid path argument"),
        _meta("VALIDATION_INVALID_VALUE", "VALIDATION", "ERROR", "Invalid argument value"),
    ]
)


def _validate_registry() -> None:
    """Validate that enum values and registry entries match one to one.

    Raises:
        ValueError: If any enum value lacks metadata or the registry has extras.
    """
    enum_codes = {code.value for code in DiagnosticCode}
    registry_codes = set(_METADATA_REGISTRY)
    missing = enum_codes - registry_codes
    if missing:
        raise ValueError(f"Unregistered diagnostic codes: {sorted(missing)}")
    extra = registry_codes - enum_codes
    if extra:
        raise ValueError(f"Registered codes not in enum: {sorted(extra)}")


def get_metadata(code: str) -> DiagnosticMetadata:
    """Get metadata for a diagnostic code.

    Raises:
        ValueError: If the code is not registered.
    """
    if code not in _METADATA_REGISTRY:
        raise ValueError(f"Unknown diagnostic code: {code}")
    return _METADATA_REGISTRY[code]


def is_valid_code(code: str) -> bool:
    try:
        DiagnosticCode(code)
    except ValueError:
        return False
    return True


def list_codes_by_category() -> dict[str, list[str]]:
    """List all diagnostic codes grouped by category."""
    categories: dict[str, list[str]] = {}
    for metadata in _METADATA_REGISTRY.values():
        categories.setdefault(metadata.category, []).append(metadata.code)
    return {cat: sorted(codes) for cat, codes in sorted(categories.items())}


def generate_documentation() -> str:
    """Generate markdown documentation of all diagnostic codes."""
    lines = ["# Diagnostic Codes", "", "Codes emitted by lacflow, grouped by category.", ""]
    for category, codes in list_codes_by_category().items():
        lines.extend([f"## {category}", ""])
        for code in codes:
            metadata = get_metadata(code)
            lines.append(f"- `{code}` ({metadata.default_severity}): {metadata.description}")
        lines.append("")
    return "\n".join(lines)


_validate_registry()
