from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Optional

import yaml

from lacflow.constants import (
    DEFAULT_AC_MAX_ITER,
    DEFAULT_AC_TOL,
    DEFAULT_EVAL_MODELS,
    DEFAULT_KV_BANDS,
    DEFAULT_MODEL_PAIRS,
    DEFAULT_REFINE_PASSES,
    DEFAULT_REFINE_TOL,
    DEFAULT_TOL_MVA,
    DEFAULT_TOLERANCES_MVAR,
    DEFAULT_TOLERANCES_MW,
    LINEAR_MODELS,
    NEAR_ZERO_PU,
    SERIES_MIN_BASELINE_ERROR,
    VALID_REPORT_FORMATS,
)
from lacflow.diagnostics import DiagnosticCollector, add
from lacflow.exceptions import ConfigError
from lacflow.fs import FileSystemAdapter
from lacflow.scenarios import ScenarioSpec
from lacflow.solvers.ac import AcOptions
from lacflow.validation import enforce_size_limit

KvBand = tuple[str, float, float]


@dataclass(frozen=True)
class LinearConfig:
    refine_tol: float = DEFAULT_REFINE_TOL
    refine_passes: int = DEFAULT_REFINE_PASSES


@dataclass(frozen=True)
class RegressionConfig:
    free_intercept: bool = False


@dataclass(frozen=True)
class MetricsConfig:
    """Report layout settings.

    Attributes:
        tolerances_mw: |P| thresholds for the active flow table
        tolerances_mvar: |Q| thresholds for the reactive flow table
        tol_mva: |S| threshold for the complex power table
        near_zero: AC values at or below this (p.u.) are skipped by percentage errors
        kv_bands: (label, low, high) half-open voltage bands in kV
        pairs: (baseline, improved) model pairs reported as improvement rows
        series_min_error: baseline error fraction below which branches leave the filtered series
    """

    tolerances_mw: tuple[float, ...] = DEFAULT_TOLERANCES_MW
    tolerances_mvar: tuple[float, ...] = DEFAULT_TOLERANCES_MVAR
    tol_mva: float = DEFAULT_TOL_MVA
    near_zero: float = NEAR_ZERO_PU
    kv_bands: tuple[KvBand, ...] = DEFAULT_KV_BANDS
    pairs: tuple[tuple[str, str], ...] = DEFAULT_MODEL_PAIRS
    series_min_error: float = SERIES_MIN_BASELINE_ERROR


@dataclass(frozen=True)
class EvalConfig:
    models: tuple[str, ...] = DEFAULT_EVAL_MODELS
    formats: tuple[str, ...] = VALID_REPORT_FORMATS
    threads: Optional[int] = None


@dataclass
class ConfigModel:
    """Run configuration: built-in defaults, overlaid by YAML, overlaid by CLI flags.

    Attributes:
        ac: Newton-Raphson settings
        linear: sparse solve refinement for the linear models
        regression: coefficient fitting settings
        metrics: report table layout
        scenarios: hourly scenario generator settings
        eval: models, report formats and worker count for ``eval``
        strict: If True, unknown config keys are errors
    """

    ac: AcOptions = field(default_factory=AcOptions)
    linear: LinearConfig = field(default_factory=LinearConfig)
    regression: RegressionConfig = field(default_factory=RegressionConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    scenarios: ScenarioSpec = field(default_factory=ScenarioSpec)
    eval: EvalConfig = field(default_factory=EvalConfig)
    strict: bool = False


_SECTION_KEYS: Dict[str, set[str]] = {
    "ac": {"tol", "max_iter", "flat_start", "enforce_q_limits", "max_q_rounds"},
    "linear": {"refine_tol", "refine_passes"},
    "regression": {"free_intercept"},
    "metrics": {
        "tolerances_mw",
        "tolerances_mvar",
        "tol_mva",
        "near_zero",
        "kv_bands",
        "pairs",
        "series_min_error",
    },
    "scenarios": {"hours", "amplitude", "phase_hours", "noise_sd", "bounds", "seed"},
    "eval": {"models", "formats", "threads"},
}
_TOP_LEVEL_KEYS = set(_SECTION_KEYS) | {"strict"}


def load_yaml(path: Path, *, fs: FileSystemAdapter, diagnostics: DiagnosticCollector) -> Dict:
    """Load and parse a YAML run configuration.

    Returns:
        Parsed dictionary, or empty dict if the file is missing or invalid
    """
    if not fs.exists(path):
        add(diagnostics, "ERROR", "CONFIG_MISSING", f"Config file not found: {path}")
        return {}
    try:
        raw_text = fs.read_text(path)
    except (IOError, OSError) as exc:  # pragma: no cover - IO error path
        add(diagnostics, "ERROR", "CONFIG_READ_FAIL", f"Failed to read config: {exc}")
        return {}
    if not enforce_size_limit(raw_text, path, diagnostics):
        return {}
    try:
        data = yaml.safe_load(raw_text) or {}
    except yaml.YAMLError as exc:
        add(diagnostics, "ERROR", "CONFIG_PARSE_ERROR", f"Invalid YAML: {exc}")
        return {}
    if not isinstance(data, dict):
        add(diagnostics, "ERROR", "CONFIG_SCHEMA_VALIDATION", "Config root must be a mapping")
        return {}
    return data


def _report_unknown_keys(
    raw: Dict, allowed: set[str], prefix: str, strict: bool, diagnostics: DiagnosticCollector
) -> None:
    for key in raw:
        if key not in allowed:
            severity = "ERROR" if strict else "WARN"
            add(diagnostics, severity, "CONFIG_UNKNOWN_KEY", f"Unknown config key: {prefix}{key}")


def _section(raw: Dict, name: str, strict: bool, diagnostics: DiagnosticCollector) -> Dict:
    value = raw.get(name) or {}
    if not isinstance(value, dict):
        add(diagnostics, "ERROR", "CONFIG_SCHEMA_VALIDATION", f"{name} must be a mapping")
        return {}
    _report_unknown_keys(value, _SECTION_KEYS[name], f"{name}.", strict, diagnostics)
    return {k: v for k, v in value.items() if k in _SECTION_KEYS[name]}


def _build(
    factory: Callable[..., Any],
    default: Any,
    values: Dict,
    name: str,
    diagnostics: DiagnosticCollector,
) -> Any:
    if not values:
        return default
    try:
        return factory(default, **values)
    except (ValueError, TypeError, ConfigError) as exc:
        add(diagnostics, "ERROR", "CONFIG_VALIDATION_ERROR", f"{name}: {exc}")
        return default


def _metrics_values(values: Dict) -> Dict:
    converted = dict(values)
    for key in ("tolerances_mw", "tolerances_mvar"):
        if key in converted:
            converted[key] = tuple(float(t) for t in converted[key])
    if "kv_bands" in converted:
        converted["kv_bands"] = tuple(
            (
                str(band["label"]),
                float(band.get("low", 0.0)),
                math.inf if band.get("high") is None else float(band["high"]),
            )
            for band in converted["kv_bands"]
        )
    if "pairs" in converted:
        converted["pairs"] = tuple((str(a), str(b)) for a, b in converted["pairs"])
    return converted


def _check_eval(config: EvalConfig) -> EvalConfig:
    unknown = [m for m in config.models if m not in LINEAR_MODELS]
    if unknown:
        raise ConfigError(f"unknown models {unknown}; choose from {list(LINEAR_MODELS)}")
    bad = [f for f in config.formats if f not in VALID_REPORT_FORMATS]
    if bad:
        raise ConfigError(f"unknown report formats {bad}")
    if config.threads is not None and config.threads < 1:
        raise ConfigError("threads must be >= 1")
    return config


def _eval_factory(default: EvalConfig, **values: Any) -> EvalConfig:
    for key in ("models", "formats"):
        if key in values:
            values[key] = tuple(values[key])
    return _check_eval(replace(default, **values))


def _scenario_factory(default: ScenarioSpec, **values: Any) -> ScenarioSpec:
    if "bounds" in values:
        values["bounds"] = tuple(values["bounds"])
    return replace(default, **values)


def parse_model(raw: Dict, strict: bool, diagnostics: DiagnosticCollector) -> ConfigModel:
    """Parse a raw YAML mapping into a ConfigModel; problems become diagnostics."""
    strict = bool(raw.get("strict", strict))
    _report_unknown_keys(raw, _TOP_LEVEL_KEYS, "", strict, diagnostics)
    model = ConfigModel(strict=strict)
    sections = {name: _section(raw, name, strict, diagnostics) for name in _SECTION_KEYS}
    model.ac = _build(replace, model.ac, sections["ac"], "ac", diagnostics)
    model.linear = _build(replace, model.linear, sections["linear"], "linear", diagnostics)
    model.regression = _build(
        replace, model.regression, sections["regression"], "regression", diagnostics
    )
    model.metrics = _build(
        lambda d, **v: replace(d, **_metrics_values(v)),
        model.metrics,
        sections["metrics"],
        "metrics",
        diagnostics,
    )
    model.scenarios = _build(
        _scenario_factory, model.scenarios, sections["scenarios"], "scenarios", diagnostics
    )
    model.eval = _build(_eval_factory, model.eval, sections["eval"], "eval", diagnostics)
    return model


# CLI attribute -> (section, field)
_CLI_OVERRIDES: Dict[str, tuple[str, str]] = {
    "ac_tol": ("ac", "tol"),
    "max_iter": ("ac", "max_iter"),
    "enforce_q_limits": ("ac", "enforce_q_limits"),
    "free_intercept": ("regression", "free_intercept"),
    "hours": ("scenarios", "hours"),
    "seed": ("scenarios", "seed"),
    "amplitude": ("scenarios", "amplitude"),
    "noise_sd": ("scenarios", "noise_sd"),
    "models": ("eval", "models"),
    "formats": ("eval", "formats"),
    "threads": ("eval", "threads"),
}


def apply_cli_overrides(model: ConfigModel, args: Any, diagnostics: DiagnosticCollector) -> ConfigModel:
    """Overlay explicitly given CLI flags; flags left at None or False keep the config value."""
    per_section: Dict[str, Dict[str, Any]] = {}
    for attr, (section, name) in _CLI_OVERRIDES.items():
        value = getattr(args, attr, None)
        if value is None or value is False:
            continue
        if isinstance(value, list):
            value = tuple(value)
        per_section.setdefault(section, {})[name] = value
    factories = {"scenarios": _scenario_factory, "eval": _eval_factory}
    for section, values in per_section.items():
        current = getattr(model, section)
        updated = _build(factories.get(section, replace), current, values, section, diagnostics)
        setattr(model, section, updated)
    if getattr(args, "strict", False):
        model.strict = True
    return model


def load_and_merge(args, diagnostics: DiagnosticCollector, fs: FileSystemAdapter) -> ConfigModel:
    raw: Dict = {}
    if getattr(args, "config_path", None):
        raw = load_yaml(Path(args.config_path), fs=fs, diagnostics=diagnostics)
        from lacflow.schema_validator import validate_config_schema

        if raw and not validate_config_schema(raw, diagnostics):
            raw = {}
    model = parse_model(raw, bool(getattr(args, "strict", False)), diagnostics)
    return apply_cli_overrides(model, args, diagnostics)


__all__ = [
    "ConfigModel",
    "LinearConfig",
    "RegressionConfig",
    "MetricsConfig",
    "EvalConfig",
    "load_yaml",
    "parse_model",
    "apply_cli_overrides",
    "load_and_merge",
]
