"""Synthetic consecutive hourly operating cases derived from a base case.

Each hour scales every load by a system-wide multiplier drawn from a daily sinusoid plus
seeded Gaussian noise. Non-slack generation absorbs the load change in proportion to its
base output, so the slack only picks up the change in losses. Voltage setpoints and
topology never change.

The noise comes from ``numpy.random.Generator(PCG64(seed))``: one ``standard_normal`` draw
per hour, taken in hour order. PCG64 output is specified bit for bit, so a seed reproduces
the same sequence on every platform.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from lacflow.constants import (
    DEFAULT_AMPLITUDE,
    DEFAULT_HOURS,
    DEFAULT_LAMBDA_BOUNDS,
    DEFAULT_NOISE_SD,
    DEFAULT_PHASE_HOURS,
    DEFAULT_SEED,
    HOUR_FILE_TEMPLATE,
)
from lacflow.exceptions import CaseParseError, ConfigError, SolverError
from lacflow.fs import FileSystemAdapter, LocalFS
from lacflow.grid.case_io import dumps_native, load_case
from lacflow.grid.network import Network
from lacflow.logging_config import bind_case
from lacflow.solvers.ac import AcOptions, solve_ac

logger = logging.getLogger(__name__)

SCENARIO_INDEX = "scenario.json"
GENERATOR_NOTE = "numpy.random.Generator(PCG64(seed)).standard_normal, one draw per hour"


@dataclass(frozen=True)
class ScenarioSpec:
    hours: int = DEFAULT_HOURS
    amplitude: float = DEFAULT_AMPLITUDE
    phase_hours: float = DEFAULT_PHASE_HOURS
    noise_sd: float = DEFAULT_NOISE_SD
    bounds: tuple[float, float] = DEFAULT_LAMBDA_BOUNDS
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        object.__setattr__(self, "bounds", tuple(float(b) for b in self.bounds))
        low, high = self.bounds
        if self.hours < 1:
            raise ConfigError("scenario hours must be >= 1")
        if not 0.0 <= self.amplitude < 1.0:
            raise ConfigError("scenario amplitude must lie in [0, 1)")
        if self.noise_sd < 0:
            raise ConfigError("scenario noise_sd must be >= 0")
        if not low <= 1.0 <= high:
            raise ConfigError("scenario bounds must satisfy low <= 1 <= high")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("scenario seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class HourlyCase:
    hour: int
    lam: float
    network: Network
    feasible: bool = True
    reason: Optional[str] = None


def load_multipliers(spec: ScenarioSpec) -> np.ndarray:
    """Load multiplier for hours 1..spec.hours."""
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    noise = rng.standard_normal(spec.hours)
    hours = np.arange(1, spec.hours + 1, dtype=float)
    daily = spec.amplitude * np.sin(2.0 * math.pi * (hours - spec.phase_hours) / 24.0)
    return np.clip(1.0 + daily + spec.noise_sd * noise, *spec.bounds)


def scale_network(base: Network, lam: float, *, name: Optional[str] = None) -> Network:
    """Scale all loads by ``lam`` and redispatch the non-slack generators to match."""
    slack_id = base.buses[base.slack].id
    total_load = sum(bus.p_load for bus in base.buses)
    movable = sum(
        gen.p_gen for gen in base.generators if gen.in_service and gen.bus != slack_id
    )
    factor = 1.0 + (lam - 1.0) * total_load / movable if movable != 0 else 1.0
    buses = tuple(replace(bus, p_load=bus.p_load * lam, q_load=bus.q_load * lam) for bus in base.buses)
    generators = tuple(
        replace(gen, p_gen=gen.p_gen * factor)
        if gen.in_service and gen.bus != slack_id
        else gen
        for gen in base.generators
    )
    return Network(
        buses=buses,
        generators=generators,
        branches=base.branches,
        base_mva=base.base_mva,
        name=name if name is not None else base.name,
    )


def generate_hourly_cases(
    base: Network,
    spec: Optional[ScenarioSpec] = None,
    *,
    check_feasibility: bool = False,
    ac_options: Optional[AcOptions] = None,
) -> list[HourlyCase]:
    """Hourly cases in hour order; infeasible hours are kept and flagged."""
    spec = spec or ScenarioSpec()
    stem = base.name or "case"
    cases = []
    for hour, lam in enumerate(load_multipliers(spec), start=1):
        name = f"{stem}_h{hour:03d}"
        network = scale_network(base, float(lam), name=name)
        feasible, reason = True, None
        if check_feasibility:
            with bind_case(name):
                try:
                    solve_ac(network, ac_options)
                except SolverError as exc:
                    feasible, reason = False, str(exc)
                    logger.warning("hour infeasible", extra={"hour": hour, "lambda": float(lam)})
        cases.append(HourlyCase(hour, float(lam), network, feasible, reason))
    return cases


def scenario_manifest(
    cases: Sequence[HourlyCase], spec: ScenarioSpec, *, base_case: str = ""
) -> dict[str, Any]:
    spec_dict = asdict(spec)
    spec_dict["bounds"] = list(spec.bounds)
    return {
        "base_case": base_case,
        "spec": spec_dict,
        "generator": GENERATOR_NOTE,
        "lambda": [case.lam for case in cases],
        "hours": [
            {
                "hour": case.hour,
                "lambda": case.lam,
                "file": HOUR_FILE_TEMPLATE.format(hour=case.hour),
                "feasible": case.feasible,
                "reason": case.reason,
            }
            for case in cases
        ],
        "infeasible": [case.hour for case in cases if not case.feasible],
    }


def write_scenarios(
    cases: Sequence[HourlyCase],
    spec: ScenarioSpec,
    out_dir: Path,
    *,
    base_case: str = "",
    fs: Optional[FileSystemAdapter] = None,
) -> list[Path]:
    """Write hour_NNN.json files plus the scenario manifest; returns every path written."""
    fs = fs or LocalFS()
    fs.makedirs(out_dir)
    written = []
    for case in cases:
        path = out_dir / HOUR_FILE_TEMPLATE.format(hour=case.hour)
        fs.write_text(path, dumps_native(case.network))
        written.append(path)
    manifest_path = out_dir / SCENARIO_INDEX
    fs.write_text(
        manifest_path,
        json.dumps(scenario_manifest(cases, spec, base_case=base_case), indent=2) + "\n",
    )
    written.append(manifest_path)
    return written


def read_scenarios(
    cases_dir: Path, *, fs: Optional[FileSystemAdapter] = None
) -> list[HourlyCase]:
    """Load a scenario directory written by ``write_scenarios``.

    Without a scenario manifest every ``hour_*.json`` file is loaded with lambda = 1.
    """
    fs = fs or LocalFS()
    manifest_path = cases_dir / SCENARIO_INDEX
    if fs.exists(manifest_path):
        try:
            manifest = json.loads(fs.read_text(manifest_path))
            entries = [(e["hour"], e["lambda"], e["file"]) for e in manifest["hours"]]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CaseParseError(f"invalid scenario manifest: {exc}") from exc
    else:
        files = [p for p in fs.list_dir(cases_dir) if p.name.startswith("hour_") and p.suffix == ".json"]
        entries = [(int(p.stem.split("_")[1]), 1.0, p.name) for p in files]
    cases = []
    for hour, lam, file_name in sorted(entries):
        network = load_case(cases_dir / file_name, fs=fs)
        cases.append(HourlyCase(int(hour), float(lam), network))
    return cases


__all__ = [
    "ScenarioSpec",
    "HourlyCase",
    "load_multipliers",
    "scale_network",
    "generate_hourly_cases",
    "scenario_manifest",
    "write_scenarios",
    "read_scenarios",
]
