"""Exit code strategy for the lacflow CLI.

The contract is deliberately small: 0 success, 1 input or usage error, 2 numerical
failure. Diagnostic codes map onto these categories.
"""

from __future__ import annotations

from enum import IntEnum
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from lacflow.diagnostics import DiagnosticCollector


class ExitCode(IntEnum):
    """Exit codes for the lacflow CLI.

    0: success
    1: input/usage error (arguments, config, case files, coefficients, IO)
    2: numerical failure (divergence, singular systems, rank deficiency)
    """

    SUCCESS = 0
    INPUT = 1
    NUMERICAL = 2


_CODE_TO_CATEGORY = {
    "AC_DIVERGENCE": ExitCode.NUMERICAL,
    "AC_SINGULAR_JACOBIAN": ExitCode.NUMERICAL,
    "LINEAR_SINGULAR_SYSTEM": ExitCode.NUMERICAL,
    "REGRESSION_RANK_DEFICIENT": ExitCode.NUMERICAL,
    "NUMERICAL_ERROR": ExitCode.NUMERICAL,
    "EVAL_NO_HOURS": ExitCode.NUMERICAL,
}


def category_for(code: str) -> ExitCode:
    """Return the exit category of a diagnostic code (INPUT unless numerical)."""
    return _CODE_TO_CATEGORY.get(code, ExitCode.INPUT)


def get_exit_code(collector: DiagnosticCollector) -> int:
    """Derive exit code from collected diagnostics.

    Only ERROR diagnostics count. When both categories are present the input
    category wins, since numerical results on bad input are meaningless.
    """
    categories = {category_for(d.code) for d in collector.diagnostics if d.severity == "ERROR"}
    if not categories:
        return ExitCode.SUCCESS
    if ExitCode.INPUT in categories:
        return ExitCode.INPUT
    return ExitCode.NUMERICAL
