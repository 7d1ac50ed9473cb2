"""Custom exception hierarchy for lacflow.

Library code raises these; the CLI layer turns them into diagnostics. Every class
names its registered diagnostic code so the conversion stays mechanical.
"""

from __future__ import annotations

from typing import Sequence


class LacflowError(Exception):
    """Base exception for all lacflow errors."""

    code = "CLI_UNHANDLED"


# Network and case errors
class NetworkError(LacflowError):
    """Base class for network model errors."""

    code = "CASE_INVALID"


class InvalidBranch(NetworkError):
    """Raised when a branch has no usable series impedance."""

    code = "CASE_INVALID"


class UnsupportedPhaseShift(NetworkError):
    """Raised when a linear model meets a phase-shifting transformer."""

    code = "PHASE_SHIFT_UNSUPPORTED"


class CaseError(LacflowError):
    """Base class for case file errors."""

    code = "CASE_PARSE_ERROR"


class CaseMissing(CaseError):
    """Raised when a case file or scenario directory does not exist."""

    code = "CASE_MISSING"


class CaseParseError(CaseError):
    """Raised when a case file cannot be parsed."""

    code = "CASE_PARSE_ERROR"

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None) -> None:
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field {field}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class CaseValidationError(CaseError):
    """Raised when a parsed case violates network invariants."""

    code = "CASE_INVALID"

    def __init__(self, violations: Sequence[str]) -> None:
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid network")


# Configuration errors
class ConfigError(LacflowError):
    """Base class for configuration-related errors."""

    code = "CONFIG_VALIDATION_ERROR"


class ConfigFileError(ConfigError):
    """Raised when a configuration or schema file cannot be read or parsed."""

    code = "CONFIG_READ_FAIL"


class CoefficientsError(LacflowError):
    """Raised when a coefficients document is missing fields or holds invalid values."""

    code = "COEFFS_INVALID"


class CoefficientsRequired(CoefficientsError):
    """Raised when a data-driven model is requested without coefficients."""

    code = "COEFFS_REQUIRED"


# Solver errors
class SolverError(LacflowError):
    """Base class for numerical solver failures."""

    code = "NUMERICAL_ERROR"


class Divergence(SolverError):
    """Raised when Newton-Raphson fails to reach the mismatch tolerance."""

    code = "AC_DIVERGENCE"

    def __init__(self, iterations: int, last_mismatch: float) -> None:
        self.iterations = iterations
        self.last_mismatch = last_mismatch
        super().__init__(
            f"AC power flow diverged after {iterations} iterations "
            f"(max mismatch {last_mismatch:.3e} p.u.)"
        )


class SingularJacobian(SolverError):
    """Raised when the Newton-Raphson Jacobian cannot be factorized."""

    code = "AC_SINGULAR_JACOBIAN"

    def __init__(self, iteration: int) -> None:
        self.iteration = iteration
        super().__init__(f"Jacobian is singular at iteration {iteration}")


class SingularSystem(SolverError):
    """Raised when a linear model's network matrix cannot be factorized."""

    code = "LINEAR_SINGULAR_SYSTEM"


# Regression errors
class RegressionError(LacflowError):
    """Base class for regression failures."""

    code = "NUMERICAL_ERROR"


class RankDeficient(RegressionError):
    """Raised when a design matrix column is linearly dependent on earlier ones."""

    code = "REGRESSION_RANK_DEFICIENT"

    def __init__(self, column: str) -> None:
        self.column = column
        super().__init__(f"design matrix is rank deficient at column {column!r}")


class NotApplicable(RegressionError):
    """Raised when a diagnostic is not defined for the given fit."""

    code = "NUMERICAL_ERROR"


class TopologyMismatch(RegressionError):
    """Raised when solutions pooled into one dataset disagree on topology."""

    code = "CASE_INVALID"


class NumericalError(RegressionError):
    """Raised when a special-function evaluation returns a non-finite value."""

    code = "NUMERICAL_ERROR"


# Metric errors
class MetricError(LacflowError):
    """Base class for metric evaluation failures."""

    code = "NUMERICAL_ERROR"


class EmptyFilter(MetricError):
    """Raised when a filter leaves no observations."""


class Undefined(MetricError):
    """Raised when a metric is mathematically undefined for its inputs."""
