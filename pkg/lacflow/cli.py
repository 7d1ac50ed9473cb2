from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Optional, TextIO

import numpy as np

from lacflow import config as config_module
from lacflow.commands import COMMANDS, CommandResult, RunContext
from lacflow.constants import VALID_MODELS, VALID_REPORT_FORMATS
from lacflow.diagnostics import (
    DiagnosticCollector,
    add,
    add_exception,
    exit_code,
    has_errors,
    to_console,
    to_json,
)
from lacflow.exceptions import ConfigFileError, LacflowError
from lacflow.fs import FileSystemAdapter, LocalFS
from lacflow.logging_config import log_timed_block, setup_logging
from lacflow.manifest import RunManifest, append_run, hash_artifacts, utc_timestamp
from lacflow.validation import validate_cli_args


@dataclass
class CLIArgs:
    """Parsed command-line arguments for lacflow.

    Attributes:
        command: Subcommand name (solve, fit, scenarios, eval, convert)
        verbose: Verbosity level (0=quiet, 1=warnings, 2=info, 3+=debug)
        config_path: Optional path to YAML configuration file
        strict: If True, treat unknown config keys as errors
        log_file: Optional path to write structured logs
        case_format: Force the input case format instead of detecting it from the suffix

    The remaining fields are subcommand options; fields a subcommand does not take stay None.
    """

    command: str
    verbose: int = 0
    config_path: Optional[Path] = None
    strict: bool = False
    log_file: Optional[Path] = None
    log_max_bytes: int = 0
    case_format: Optional[str] = None
    # solve
    case: Optional[Path] = None
    model: Optional[str] = None
    coeffs: Optional[Path] = None
    out: Optional[Path] = None
    # fit
    train: list[Path] = field(default_factory=list)
    diagnostics_out: Optional[Path] = None
    free_intercept: bool = False
    # scenarios
    base: Optional[Path] = None
    out_dir: Optional[Path] = None
    hours: Optional[int] = None
    seed: Optional[int] = None
    amplitude: Optional[float] = None
    noise_sd: Optional[float] = None
    check_feasibility: bool = False
    # eval
    cases_dir: Optional[Path] = None
    models: Optional[list[str]] = None
    formats: Optional[list[str]] = None
    threads: Optional[int] = None
    # convert
    source: Optional[Path] = None
    # AC solver overrides
    ac_tol: Optional[float] = None
    max_iter: Optional[int] = None
    enforce_q_limits: bool = False


class _ArgumentParser(argparse.ArgumentParser):
    """Raise instead of exiting so usage errors flow through the diagnostics path."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ValueError(f"{self.prog}: {message}")


def _csv_list(choices: tuple[str, ...]) -> Callable[[str], list[str]]:
    def parse(text: str) -> list[str]:
        items = [item.strip() for item in text.split(",") if item.strip()]
        if not items:
            raise argparse.ArgumentTypeError("expected a comma-separated list")
        unknown = [item for item in items if item not in choices]
        if unknown:
            raise argparse.ArgumentTypeError(
                f"unknown value(s) {', '.join(unknown)}; choose from {', '.join(choices)}"
            )
        return items

    return parse


def _global_options(*, suppress: bool) -> argparse.ArgumentParser:
    """Options accepted both before and after the subcommand name."""
    parent = argparse.ArgumentParser(add_help=False)

    def default(value: Any) -> Any:
        return argparse.SUPPRESS if suppress else value

    parent.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=default(0),
        help="Increase verbosity: -v (warn), -vv (info), -vvv (debug)",
    )
    parent.add_argument("--config", dest="config_path", default=default(None), help="YAML run configuration")
    parent.add_argument(
        "--strict", action="store_true", default=default(False), help="Treat unknown config keys as errors"
    )
    parent.add_argument("--log-file", dest="log_file", default=default(None), help="Also write JSON logs here")
    parent.add_argument(
        "--log-max-bytes",
        dest="log_max_bytes",
        type=int,
        default=default(0),
        help="Rotate the log file after this many bytes (0 disables rotation)",
    )
    return parent


def _ac_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("AC solver")
    group.add_argument("--ac-tol", dest="ac_tol", type=float, help="Mismatch tolerance in p.u.")
    group.add_argument("--max-iter", dest="max_iter", type=int, help="Newton-Raphson iteration cap")
    group.add_argument(
        "--enforce-q-limits",
        dest="enforce_q_limits",
        action="store_true",
        help="Switch PV buses that violate reactive limits to PQ",
    )


def _case_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        dest="case_format",
        choices=("native", "matpower"),
        help="Input case format (default: from the file suffix, .m is MATPOWER)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="lacflow",
        description="Linear power-flow models with regression-fitted coefficients",
        epilog="""
Examples:
  lacflow solve --case case14.m --model lac --out lac.json
  lacflow fit --train case14.m --out coeffs.json
  lacflow scenarios --base case14.m --hours 72 --seed 7 --out-dir hours
  lacflow eval --cases-dir hours --coeffs coeffs.json --models dc,ddc,lac,dlac --out-dir results
  lacflow convert --source case9.m --out case9.json
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[_global_options(suppress=False)],
    )
    common = _global_options(suppress=True)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_ArgumentParser)
    sub.required = True

    solve = sub.add_parser("solve", parents=[common], help="Solve one case with one model")
    solve.add_argument("--case", required=True, help="Case file (native JSON or MATPOWER .m)")
    solve.add_argument("--model", required=True, choices=VALID_MODELS)
    solve.add_argument("--coeffs", help="Coefficients JSON (required for ddc and dlac)")
    solve.add_argument("--out", required=True, help="Solution JSON to write")
    _case_format(solve)
    _ac_options(solve)

    fit = sub.add_parser("fit", parents=[common], help="Fit K_D and K_A from AC training cases")
    fit.add_argument("--train", required=True, nargs="+", help="Training case files")
    fit.add_argument("--out", required=True, help="Coefficients JSON to write")
    fit.add_argument(
        "--diagnostics-out", dest="diagnostics_out", help="Regression diagnostics JSON (default: next to --out)"
    )
    fit.add_argument(
        "--free-intercept", dest="free_intercept", action="store_true", help="Add an intercept column"
    )
    _case_format(fit)
    _ac_options(fit)

    scenarios = sub.add_parser("scenarios", parents=[common], help="Generate hourly load cases")
    scenarios.add_argument("--base", required=True, help="Base case file")
    scenarios.add_argument("--out-dir", dest="out_dir", required=True, help="Directory for hour_NNN.json files")
    scenarios.add_argument("--hours", type=int)
    scenarios.add_argument("--seed", type=int)
    scenarios.add_argument("--amplitude", type=float)
    scenarios.add_argument("--noise-sd", dest="noise_sd", type=float)
    scenarios.add_argument(
        "--check-feasibility",
        dest="check_feasibility",
        action="store_true",
        help="Solve AC for every hour and flag the ones that fail",
    )
    _case_format(scenarios)
    _ac_options(scenarios)

    evaluate = sub.add_parser("eval", parents=[common], help="Compare linear models against AC per hour")
    evaluate.add_argument("--cases-dir", dest="cases_dir", required=True, help="Scenario directory")
    evaluate.add_argument("--coeffs", help="Coefficients JSON (required for ddc and dlac)")
    evaluate.add_argument("--models", type=_csv_list(tuple(m for m in VALID_MODELS if m != "ac")))
    evaluate.add_argument("--formats", type=_csv_list(VALID_REPORT_FORMATS))
    evaluate.add_argument("--threads", type=int, help="Worker processes (default: LACFLOW_THREADS or CPU count)")
    evaluate.add_argument("--out-dir", dest="out_dir", required=True)
    _ac_options(evaluate)

    convert = sub.add_parser("convert", parents=[common], help="Convert a case to the native format")
    convert.add_argument("--source", required=True, help="Input case file")
    convert.add_argument("--out", required=True, help="Native JSON file to write")
    _case_format(convert)
    return parser


def _path(value: Optional[str]) -> Optional[Path]:
    return Path(value).expanduser() if value else None


def parse_args(argv: list[str]) -> CLIArgs:
    """Parse command-line arguments.

    Raises:
        ValueError: unknown subcommand, missing required options or invalid values
    """
    parsed = build_parser().parse_args(argv)
    return CLIArgs(
        command=parsed.command,
        verbose=int(parsed.verbose),
        config_path=_path(parsed.config_path),
        strict=bool(parsed.strict),
        log_file=_path(parsed.log_file),
        log_max_bytes=int(parsed.log_max_bytes),
        case_format=getattr(parsed, "case_format", None),
        case=_path(getattr(parsed, "case", None)),
        model=getattr(parsed, "model", None),
        coeffs=_path(getattr(parsed, "coeffs", None)),
        out=_path(getattr(parsed, "out", None)),
        train=[Path(p).expanduser() for p in getattr(parsed, "train", None) or ()],
        diagnostics_out=_path(getattr(parsed, "diagnostics_out", None)),
        free_intercept=bool(getattr(parsed, "free_intercept", False)),
        base=_path(getattr(parsed, "base", None)),
        out_dir=_path(getattr(parsed, "out_dir", None)),
        hours=getattr(parsed, "hours", None),
        seed=getattr(parsed, "seed", None),
        amplitude=getattr(parsed, "amplitude", None),
        noise_sd=getattr(parsed, "noise_sd", None),
        check_feasibility=bool(getattr(parsed, "check_feasibility", False)),
        cases_dir=_path(getattr(parsed, "cases_dir", None)),
        models=getattr(parsed, "models", None),
        formats=getattr(parsed, "formats", None),
        threads=getattr(parsed, "threads", None),
        source=_path(getattr(parsed, "source", None)),
        ac_tol=getattr(parsed, "ac_tol", None),
        max_iter=getattr(parsed, "max_iter", None),
        enforce_q_limits=bool(getattr(parsed, "enforce_q_limits", False)),
    )


_NUMERICAL_EXCEPTIONS = (np.linalg.LinAlgError, FloatingPointError, ZeroDivisionError)


def handle_exception(exc: BaseException, diagnostics: DiagnosticCollector) -> None:
    """Record an exception as a diagnostic under its registered code.

    Raises:
        KeyboardInterrupt: re-raised without recording
    """
    if isinstance(exc, KeyboardInterrupt):  # pragma: no cover - passthrough
        raise exc
    # LinAlgError is a ValueError; test it first.
    if isinstance(exc, _NUMERICAL_EXCEPTIONS):
        add(diagnostics, "ERROR", "NUMERICAL_ERROR", f"{type(exc).__name__}: {exc}")
        return
    if isinstance(exc, ValueError) and not isinstance(exc, LacflowError):
        add(diagnostics, "ERROR", "CLI_USAGE", str(exc))
        return
    if isinstance(exc, OSError):
        add(diagnostics, "ERROR", "REPORT_WRITE_FAIL", f"Failed to write output: {exc}")
        return
    add_exception(diagnostics, exc)


def _parse_cli_args(argv: list[str]) -> tuple[Optional[CLIArgs], Optional[DiagnosticCollector]]:
    try:
        return parse_args(argv), None
    except ValueError as exc:
        diagnostics = DiagnosticCollector()
        handle_exception(exc, diagnostics)
        return None, diagnostics


def _report_failure(diagnostics: DiagnosticCollector, *, verbose: bool) -> int:
    _stderr().write(to_json(diagnostics) + "\n")
    to_console(diagnostics, stream=_stdout(), verbose=verbose)
    return exit_code(diagnostics)


def run(
    argv: list[str],
    *,
    fs: Optional[FileSystemAdapter] = None,
    now: Optional[Callable[[], datetime]] = None,
) -> int:
    args, early_diag = _parse_cli_args(argv)
    if args is None and early_diag is not None:
        return _report_failure(early_diag, verbose=True)
    diagnostics = DiagnosticCollector()
    fs = fs or LocalFS()
    now = now or (lambda: datetime.now(timezone.utc))
    validate_cli_args(args, diagnostics)
    if has_errors(diagnostics):
        return _report_failure(diagnostics, verbose=True)
    correlation_id = setup_logging(
        verbosity=args.verbose, log_file=args.log_file, max_bytes=args.log_max_bytes
    )
    config = config_module.load_and_merge(args, diagnostics, fs)
    if has_errors(diagnostics):
        return _report_failure(diagnostics, verbose=bool(args.verbose))
    ctx = RunContext(
        args=args,
        config=config,
        diagnostics=diagnostics,
        filesystem=fs,
        now=now,
        correlation_id=correlation_id,
    )
    started = now()
    clock = time.perf_counter()
    result = _execute_command(ctx)
    if result is None or has_errors(diagnostics):
        return _report_failure(diagnostics, verbose=bool(args.verbose))
    _write_manifest(ctx, result, started=started, duration_s=time.perf_counter() - clock)
    if has_errors(diagnostics):
        return _report_failure(diagnostics, verbose=bool(args.verbose))
    out = _stdout()
    for message in result.messages:
        out.write(message + "\n")
    to_console(diagnostics, stream=out, verbose=bool(args.verbose))
    return exit_code(diagnostics)


def _execute_command(ctx: RunContext) -> Optional[CommandResult]:
    command = COMMANDS[ctx.args.command]
    try:
        with log_timed_block(f"command:{ctx.args.command}", verbosity=ctx.args.verbose):
            return command(ctx)
    except KeyboardInterrupt:  # pragma: no cover - passthrough
        raise
    except Exception as exc:
        handle_exception(exc, ctx.diagnostics)
        return None


def _write_manifest(ctx: RunContext, result: CommandResult, *, started: datetime, duration_s: float) -> None:
    fs = ctx.filesystem
    record = RunManifest(
        command=ctx.args.command,
        inputs=result.inputs,
        options=result.options,
        artifacts=hash_artifacts(result.artifacts, result.out_dir, fs),
        started_at=utc_timestamp(started),
        duration_s=round(duration_s, 6),
        exit_code=exit_code(ctx.diagnostics),
        correlation_id=ctx.correlation_id or None,
    )
    try:
        append_run(result.out_dir, record, fs)
    except ConfigFileError as exc:
        add(ctx.diagnostics, "ERROR", "REPORT_WRITE_FAIL", str(exc), location=str(result.out_dir))
    except OSError as exc:  # pragma: no cover - IO error path
        add(ctx.diagnostics, "ERROR", "REPORT_WRITE_FAIL", f"Failed to write manifest: {exc}")
    except (TypeError, ValueError) as exc:  # pragma: no cover - serialization error path
        add(ctx.diagnostics, "ERROR", "REPORT_SERIALIZE_FAIL", f"Failed to serialize manifest: {exc}")


def _stdout() -> TextIO:
    return sys.stdout


def _stderr() -> TextIO:
    return sys.stderr


def main() -> None:
    raise SystemExit(run(sys.argv[1:]))
