"""Per-hour evaluation on a multiprocessing pool, merged back in hour order."""

from __future__ import annotations

import logging
import multiprocessing as mp
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

from lacflow.constants import AC_MODEL, DEFAULT_REFINE_PASSES, DEFAULT_REFINE_TOL, THREADS_ENV
from lacflow.exceptions import LacflowError, SolverError
from lacflow.grid.network import Network
from lacflow.logging_config import bind_case
from lacflow.solvers.ac import AcOptions
from lacflow.solvers.coefficients import ModelCoefficients
from lacflow.solvers.dispatch import solve_model
from lacflow.solvers.flows import solution_to_dict
from lacflow.types import SolutionDict

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class HourJob:
    """Everything one worker needs to evaluate an hour; must stay picklable."""

    hour: int
    network: Network
    models: tuple[str, ...]
    coeffs: Optional[ModelCoefficients] = None
    ac_options: AcOptions = field(default_factory=AcOptions)
    refine_tol: float = DEFAULT_REFINE_TOL
    refine_passes: int = DEFAULT_REFINE_PASSES


@dataclass(frozen=True)
class HourFailure:
    code: str
    message: str
    model: str


@dataclass(frozen=True)
class HourOutcome:
    """Serialized solutions of one hour keyed by model; ``failure`` is set when the hour failed."""

    hour: int
    solutions: dict[str, SolutionDict] = field(default_factory=dict)
    failure: Optional[HourFailure] = None

    @property
    def ok(self) -> bool:
        return self.failure is None


def resolve_threads(requested: Optional[int] = None) -> int:
    """Explicit request, else the LACFLOW_THREADS environment variable, else the CPU count."""
    if requested is not None:
        return max(1, int(requested))
    env_value = os.getenv(THREADS_ENV)
    if env_value:
        try:
            return max(1, int(env_value))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", THREADS_ENV, env_value)
    return mp.cpu_count()


def evaluate_hour(job: HourJob) -> HourOutcome:
    """Solve the AC reference and every requested model for one hour.

    Solver errors are captured in the outcome; nothing raises out of a worker.
    """
    network = job.network
    solutions: dict[str, SolutionDict] = {}
    with bind_case(network.name):
        for model in (AC_MODEL, *job.models):
            try:
                solution = solve_model(
                    network,
                    model,
                    coeffs=job.coeffs,
                    ac_options=job.ac_options,
                    refine_tol=job.refine_tol,
                    refine_passes=job.refine_passes,
                )
            except LacflowError as exc:
                infeasible = model == AC_MODEL and isinstance(exc, SolverError)
                code = "HOUR_INFEASIBLE" if infeasible else "HOUR_FAILED"
                logger.warning(
                    "hour evaluation failed",
                    extra={"hour": job.hour, "model": model, "error": str(exc)},
                )
                return HourOutcome(job.hour, solutions, HourFailure(code, str(exc), model))
            solutions[model] = solution_to_dict(
                solution, model=model, case=network.name, base_mva=network.base_mva
            )
    return HourOutcome(job.hour, solutions)


class HourEvaluator:
    """Evaluate hours in parallel with graceful fallback to serial processing."""

    def __init__(self, num_processes: Optional[int] = None) -> None:
        self.num_processes = resolve_threads(num_processes)

    def evaluate(self, jobs: Sequence[HourJob]) -> list[HourOutcome]:
        if self.num_processes <= 1 or len(jobs) <= 1:
            outcomes = [evaluate_hour(job) for job in jobs]
        else:
            try:
                with mp.Pool(processes=min(self.num_processes, len(jobs))) as pool:
                    outcomes = pool.map(evaluate_hour, jobs, chunksize=1)
            except (OSError, RuntimeError, mp.ProcessError) as exc:
                logger.warning(
                    "Parallel evaluation failed, falling back to serial: %s", exc, exc_info=True
                )
                outcomes = [evaluate_hour(job) for job in jobs]
        return sorted(outcomes, key=lambda o: o.hour)


__all__ = [
    "HourJob",
    "HourFailure",
    "HourOutcome",
    "resolve_threads",
    "evaluate_hour",
    "HourEvaluator",
]
