"""Subcommand implementations behind the CLI.

Each command reads its inputs through the context's filesystem adapter, records
problems in the context's diagnostics and returns the artifacts it wrote. Library
exceptions that end a command propagate to ``lacflow.cli``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import TYPE_CHECKING, Any, Callable, Mapping, Optional

from lacflow.config import ConfigModel
from lacflow.constants import (
    AC_MODEL,
    COEFFS_FILENAME,
    DATA_DRIVEN_MODELS,
    FAILURES_FILENAME,
    FIT_DIAGNOSTICS_FILENAME,
    HOUR_FILE_TEMPLATE,
    REPORT_MD_FILENAME,
    VIF_THRESHOLD,
)
from lacflow.diagnostics import DiagnosticCollector, add, add_exception
from lacflow.exceptions import CaseMissing, CoefficientsError, CoefficientsRequired, EmptyFilter, SolverError
from lacflow.fs import FileSystemAdapter
from lacflow.grid.case_io import (
    MATPOWER,
    detect_format,
    ensure_valid,
    matpower_to_network,
    parse_matpower,
    parse_native,
    save_case,
)
from lacflow.grid.network import Network
from lacflow.logging_config import bind_case, log_timed_block
from lacflow.markdown_reporter import MarkdownReporter
from lacflow.metrics.tables import (
    HourMetrics,
    ReportTable,
    complex_power_report,
    flow_error_table,
    hour_metrics,
    multi_hour_report,
    voltage_error_table,
)
from lacflow.parallel import HourEvaluator, HourJob, HourOutcome
from lacflow.regression.fitting import coefficient_fit_to_dict, fit_model_coefficients
from lacflow.reports import coefficient_summary_table, regression_tables, write_tables
from lacflow.scenarios import generate_hourly_cases, read_scenarios, write_scenarios
from lacflow.solvers.ac import AcSolution, solve_ac
from lacflow.solvers.coefficients import ModelCoefficients
from lacflow.solvers.dispatch import solve_model
from lacflow.solvers.flows import StoredSolution, solution_from_dict, solution_to_dict
from lacflow.solvers.linear import LinearSolution

if TYPE_CHECKING:
    from lacflow.cli import CLIArgs

logger = logging.getLogger(__name__)

FIT_REPORT_FILENAME = "fit_report.md"


@dataclass
class RunContext:
    """Execution context passed to every command.

    Attributes:
        args: Parsed command-line arguments
        config: Configuration merged from defaults, YAML and flags
        diagnostics: Collector for diagnostic messages and errors
        filesystem: File system adapter (for testing/modularity)
        now: Callable that returns the current UTC datetime
        correlation_id: Correlation ID used for tracing logs
    """

    args: "CLIArgs"
    config: ConfigModel
    diagnostics: DiagnosticCollector
    filesystem: FileSystemAdapter
    now: Callable[[], datetime]
    correlation_id: str = ""


@dataclass
class CommandResult:
    """What a successful command produced; the CLI turns it into a manifest entry."""

    out_dir: Path
    artifacts: list[Path] = field(default_factory=list)
    inputs: dict[str, Any] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)
    messages: list[str] = field(default_factory=list)


# -- shared helpers ----------------------------------------------------------------------


def load_network(ctx: RunContext, path: Path, fmt: Optional[str] = None) -> Network:
    """Load and validate a case; ignored MATPOWER sections become warnings.

    Raises:
        CaseMissing: the file does not exist
    """
    fs = ctx.filesystem
    if not fs.is_file(path):
        raise CaseMissing(f"case file not found: {path}")
    text = fs.read_text(path)
    if (fmt or detect_format(path)) == MATPOWER:
        parsed = parse_matpower(text)
        for section in parsed.ignored_sections:
            add(
                ctx.diagnostics,
                "WARN",
                "CASE_UNSUPPORTED_SECTION",
                f"unsupported section mpc.{section} ignored",
                location=str(path),
            )
        network = matpower_to_network(parsed, name=path.stem)
    else:
        network = parse_native(text, name=path.stem)
    return ensure_valid(network)


def load_coefficients(ctx: RunContext, path: Path) -> ModelCoefficients:
    if not ctx.filesystem.is_file(path):
        raise CoefficientsError(f"coefficients file not found: {path}")
    return ModelCoefficients.loads(ctx.filesystem.read_text(path))


def _write_json(fs: FileSystemAdapter, path: Path, payload: Any) -> Path:
    fs.makedirs(path.parent)
    fs.write_text(path, json.dumps(payload, indent=2) + "\n")
    return path


def _solution_payload(solution: Any, model: str, network: Network) -> dict[str, Any]:
    payload: dict[str, Any] = dict(
        solution_to_dict(solution, model=model, case=network.name, base_mva=network.base_mva)
    )
    base = network.base_mva
    if isinstance(solution, AcSolution):
        payload["mismatch_history"] = list(solution.mismatch_history)
        payload["converged_from"] = solution.converged_from
        payload["switched_to_pq"] = list(solution.switched_to_pq)
    elif isinstance(solution, LinearSolution):
        payload["slack_p_mw"] = solution.slack_p * base
        if solution.q_balance is not None:
            payload["q_balance_mvar"] = {
                str(bus): q * base for bus, q in solution.q_balance.items()
            }
    return payload


# -- solve -------------------------------------------------------------------------------


def cmd_solve(ctx: RunContext) -> Optional[CommandResult]:
    args, config = ctx.args, ctx.config
    case_path = Path(args.case)
    model = args.model
    if model in DATA_DRIVEN_MODELS and args.coeffs is None:
        raise CoefficientsRequired(f"coefficients required for model {model}")
    network = load_network(ctx, case_path, args.case_format)
    coeffs = load_coefficients(ctx, Path(args.coeffs)) if args.coeffs else None
    with bind_case(network.name), log_timed_block(f"solve:{model}", verbosity=args.verbose):
        solution = solve_model(
            network,
            model,
            coeffs=coeffs,
            ac_options=config.ac,
            refine_tol=config.linear.refine_tol,
            refine_passes=config.linear.refine_passes,
        )
    out = Path(args.out)
    _write_json(ctx.filesystem, out, _solution_payload(solution, model, network))
    inputs = {"case": str(case_path)}
    if args.coeffs:
        inputs["coeffs"] = str(args.coeffs)
    return CommandResult(
        out_dir=out.parent,
        artifacts=[out],
        inputs=inputs,
        options={"model": model, "ac": asdict(config.ac), "linear": asdict(config.linear)},
        messages=[f"{model} solution for {network.name} written to {out}"],
    )


# -- fit ---------------------------------------------------------------------------------


def cmd_fit(ctx: RunContext) -> Optional[CommandResult]:
    args, config, fs = ctx.args, ctx.config, ctx.filesystem
    paths = [Path(p) for p in args.train]
    networks = [load_network(ctx, p, args.case_format) for p in paths]
    solutions = []
    for path, network in zip(paths, networks):
        with bind_case(network.name), log_timed_block(f"fit:ac:{network.name}", verbosity=args.verbose):
            try:
                solutions.append(solve_ac(network, config.ac))
            except SolverError as exc:
                add_exception(ctx.diagnostics, exc, location=str(path))
                return None

    out = Path(args.out)
    diagnostics_path = Path(args.diagnostics_out) if args.diagnostics_out else out.parent / FIT_DIAGNOSTICS_FILENAME
    with log_timed_block("fit:regression", verbosity=args.verbose):
        fit = fit_model_coefficients(
            networks[0],
            solutions,
            case_ids=[n.name for n in networks],
            free_intercept=config.regression.free_intercept,
            fit_stats_ref=diagnostics_path.name,
        )
    for result in fit.fits:
        if result.vif is None:
            continue
        for name in result.vif.above(VIF_THRESHOLD):
            add(
                ctx.diagnostics,
                "WARN",
                "REGRESSION_COLLINEAR",
                f"{result.label}: VIF of {name} is at least {VIF_THRESHOLD:g}",
            )

    fs.makedirs(out.parent)
    fs.write_text(out, fit.coefficients.dumps())
    _write_json(fs, diagnostics_path, coefficient_fit_to_dict(fit))
    report_path = out.parent / FIT_REPORT_FILENAME
    reporter = MarkdownReporter("Coefficient fit")
    coeffs = fit.coefficients
    fs.write_text(
        report_path,
        reporter.generate_fit_report(
            summary={
                "training cases": ", ".join(coeffs.trained_on),
                "observations": fit.p_fit.n,
                "free intercept": config.regression.free_intercept,
            },
            coefficients=coefficient_summary_table(fit),
            tables=regression_tables(fit),
        ),
    )
    return CommandResult(
        out_dir=out.parent,
        artifacts=[out, diagnostics_path, report_path],
        inputs={"train": [str(p) for p in paths]},
        options={"ac": asdict(config.ac), "regression": asdict(config.regression)},
        messages=[
            f"K_D = {coeffs.k_d:.6g}",
            "K_A = " + ", ".join(f"{k:.6g}" for k in coeffs.k_a),
            f"coefficients written to {out}",
        ],
    )


# -- scenarios ---------------------------------------------------------------------------


def cmd_scenarios(ctx: RunContext) -> Optional[CommandResult]:
    args, config = ctx.args, ctx.config
    base_path = Path(args.base)
    base = load_network(ctx, base_path, args.case_format)
    spec = config.scenarios
    with log_timed_block("scenarios", verbosity=args.verbose):
        cases = generate_hourly_cases(
            base, spec, check_feasibility=args.check_feasibility, ac_options=config.ac
        )
    for case in cases:
        if not case.feasible:
            add(
                ctx.diagnostics,
                "WARN",
                "HOUR_INFEASIBLE",
                f"hour {case.hour} (lambda {case.lam:.4f}): {case.reason}",
                location=HOUR_FILE_TEMPLATE.format(hour=case.hour),
            )
    out_dir = Path(args.out_dir)
    written = write_scenarios(cases, spec, out_dir, base_case=base_path.name, fs=ctx.filesystem)
    spec_dict = asdict(spec)
    spec_dict["bounds"] = list(spec.bounds)
    return CommandResult(
        out_dir=out_dir,
        artifacts=written,
        inputs={"base": str(base_path)},
        options={"scenarios": spec_dict, "check_feasibility": bool(args.check_feasibility)},
        messages=[f"{len(cases)} hourly cases written to {out_dir}"],
    )


# -- eval --------------------------------------------------------------------------------


def _stored(payloads: Mapping[str, Any]) -> dict[str, StoredSolution]:
    return {model: solution_from_dict(p) for model, p in payloads.items()}


def _persist_raw(fs: FileSystemAdapter, raw_dir: Path, outcome: HourOutcome) -> list[Path]:
    written = []
    for model, payload in outcome.solutions.items():
        written.append(_write_json(fs, raw_dir / f"{model}.json", payload))
    return written


def _reload_raw(fs: FileSystemAdapter, raw_dir: Path, models: tuple[str, ...]) -> dict[str, StoredSolution]:
    payloads = {m: json.loads(fs.read_text(raw_dir / f"{m}.json")) for m in (AC_MODEL, *models)}
    return _stored(payloads)


def hour_tables(
    network: Network,
    hour: int,
    stored: Mapping[str, StoredSolution],
    config: ConfigModel,
) -> tuple[list[ReportTable], Optional[dict[str, Any]], HourMetrics]:
    """Every per-hour table, the complex-power error series and the multi-hour inputs."""
    metrics = config.metrics
    ac = stored[AC_MODEL]
    models = {m: s for m, s in stored.items() if m != AC_MODEL}
    tables = [
        flow_error_table(
            network, ac, models, metrics.tolerances_mw, quantity="P",
            pairs=metrics.pairs, near_zero=metrics.near_zero,
        ),
    ]
    if any(s.flows.has_reactive for s in models.values()):
        tables.append(
            flow_error_table(
                network, ac, models, metrics.tolerances_mvar, quantity="Q",
                pairs=metrics.pairs, near_zero=metrics.near_zero,
            )
        )
    tables.append(voltage_error_table(network, ac, models, metrics.kv_bands, pairs=metrics.pairs))
    series = None
    try:
        report = complex_power_report(
            network, ac, models, metrics.tol_mva,
            pairs=metrics.pairs, series_min_error=metrics.series_min_error,
        )
    except EmptyFilter as exc:
        logger.info("complex power table skipped", extra={"hour": hour, "reason": str(exc)})
    else:
        tables += [report.summary, report.errors]
        series = report.series
    per_hour = hour_metrics(network, hour, ac, models, tol_mvar=metrics.tolerances_mvar[0])
    return tables, series, per_hour


def cmd_eval(ctx: RunContext) -> Optional[CommandResult]:
    args, config, fs = ctx.args, ctx.config, ctx.filesystem
    cases_dir = Path(args.cases_dir)
    out_dir = Path(args.out_dir)
    models = tuple(config.eval.models)
    formats = tuple(config.eval.formats)

    needs_coeffs = [m for m in models if m in DATA_DRIVEN_MODELS]
    if needs_coeffs and args.coeffs is None:
        raise CoefficientsRequired(f"coefficients required for model {needs_coeffs[0]}")
    coeffs = load_coefficients(ctx, Path(args.coeffs)) if args.coeffs else None
    if not fs.is_dir(cases_dir):
        raise CaseMissing(f"cases directory not found: {cases_dir}")
    hours = read_scenarios(cases_dir, fs=fs)
    if not hours:
        raise CaseMissing(f"no hour files in {cases_dir}")

    jobs = [
        HourJob(
            hour=h.hour,
            network=h.network,
            models=models,
            coeffs=coeffs,
            ac_options=config.ac,
            refine_tol=config.linear.refine_tol,
            refine_passes=config.linear.refine_passes,
        )
        for h in hours
    ]
    with log_timed_block("eval:solve", verbosity=args.verbose):
        outcomes = HourEvaluator(config.eval.threads).evaluate(jobs)

    written: list[Path] = []
    failures: list[dict[str, Any]] = []
    networks = {h.hour: h.network for h in hours}
    succeeded: list[int] = []
    for outcome in outcomes:
        if outcome.ok:
            raw_dir = out_dir / "raw" / f"hour_{outcome.hour:03d}"
            written += _persist_raw(fs, raw_dir, outcome)
            succeeded.append(outcome.hour)
            continue
        failure = outcome.failure
        failures.append(
            {"hour": outcome.hour, "model": failure.model, "code": failure.code, "message": failure.message}
        )
        add(
            ctx.diagnostics,
            "WARN",
            failure.code,
            f"hour {outcome.hour} ({failure.model}): {failure.message}",
            location=HOUR_FILE_TEMPLATE.format(hour=outcome.hour),
        )
    written.append(_write_json(fs, out_dir / FAILURES_FILENAME, failures))
    if not succeeded:
        add(ctx.diagnostics, "ERROR", "EVAL_NO_HOURS", f"no hour of {cases_dir} could be evaluated")
        return None

    per_hour_tables: dict[int, list[ReportTable]] = {}
    per_hour_metrics: list[HourMetrics] = []
    tables_dir = out_dir / "tables"
    with log_timed_block("eval:tables", verbosity=args.verbose):
        for hour in succeeded:
            stored = _reload_raw(fs, out_dir / "raw" / f"hour_{hour:03d}", models)
            tables, series, metrics = hour_tables(networks[hour], hour, stored, config)
            per_hour_tables[hour] = tables
            per_hour_metrics.append(metrics)
            written += write_tables(tables, tables_dir, formats, fs=fs, prefix=f"hour_{hour:03d}_")
            if series is not None:
                written.append(
                    _write_json(fs, out_dir / "series" / f"hour_{hour:03d}_complex_power.json", series)
                )
        multi = None
        if len(per_hour_metrics) >= 2:
            multi = multi_hour_report(per_hour_metrics, pairs=config.metrics.pairs)
            written += write_tables([multi], tables_dir, formats, fs=fs)

    if "md" in formats:
        reporter = MarkdownReporter(f"Linear model accuracy: {cases_dir.name}")
        summary = {
            "cases": cases_dir.name,
            "models": ", ".join(models),
            "hours evaluated": len(succeeded),
            "hours failed": len(failures),
        }
        if coeffs is not None:
            summary["K_D"] = coeffs.k_d
            summary["K_A"] = ", ".join(f"{k:.6g}" for k in coeffs.k_a)
        report_path = out_dir / REPORT_MD_FILENAME
        fs.write_text(
            report_path,
            reporter.generate_eval_report(
                summary=summary,
                multi_hour=multi,
                hour_tables=per_hour_tables,
                failures=failures,
            ),
        )
        written.append(report_path)

    inputs: dict[str, Any] = {"cases_dir": str(cases_dir)}
    if args.coeffs:
        inputs["coeffs"] = str(args.coeffs)
    return CommandResult(
        out_dir=out_dir,
        artifacts=written,
        inputs=inputs,
        options={
            "models": list(models),
            "formats": list(formats),
            "ac": asdict(config.ac),
            "linear": asdict(config.linear),
            "metrics": asdict(config.metrics),
        },
        messages=[
            f"evaluated {len(succeeded)} of {len(outcomes)} hours; reports in {out_dir}",
            *(f"hour {f['hour']} failed: {f['message']}" for f in failures),
        ],
    )


# -- convert -----------------------------------------------------------------------------


def cmd_convert(ctx: RunContext) -> Optional[CommandResult]:
    args = ctx.args
    source = Path(args.source)
    network = load_network(ctx, source, args.case_format)
    out = save_case(network, Path(args.out), fs=ctx.filesystem)
    return CommandResult(
        out_dir=out.parent,
        artifacts=[out],
        inputs={"source": str(source)},
        options={"format": args.case_format or detect_format(source)},
        messages=[f"{network.name}: {network.n_bus} buses, {len(network.branches)} branches written to {out}"],
    )


COMMANDS: dict[str, Callable[[RunContext], Optional[CommandResult]]] = {
    "solve": cmd_solve,
    "fit": cmd_fit,
    "scenarios": cmd_scenarios,
    "eval": cmd_eval,
    "convert": cmd_convert,
}

__all__ = [
    "RunContext",
    "CommandResult",
    "COMMANDS",
    "load_network",
    "load_coefficients",
    "hour_tables",
    "cmd_solve",
    "cmd_fit",
    "cmd_scenarios",
    "cmd_eval",
    "cmd_convert",
    "COEFFS_FILENAME",
]
