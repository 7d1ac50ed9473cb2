"""Centralized constants and default values for lacflow.

Defaults for solver tolerances, report layouts, and file names live here so that the
config layer, the CLI, and the tests agree on a single source.
"""

from __future__ import annotations

import math

# Per-unit system
DEFAULT_BASE_MVA = 100.0

# AC solver defaults
DEFAULT_AC_TOL = 1e-8
DEFAULT_AC_MAX_ITER = 30
DEFAULT_Q_LIMIT_ROUNDS = 10
DIVERGENCE_MISMATCH = 1e10

# Sparse direct solve refinement for the linear models
DEFAULT_REFINE_TOL = 1e-11
DEFAULT_REFINE_PASSES = 2

# Metric defaults
DEFAULT_TOLERANCES_MW = (1.0, 5.0, 10.0, 50.0)
DEFAULT_TOLERANCES_MVAR = (1.0, 5.0, 10.0, 50.0)
DEFAULT_TOL_MVA = 10.0
NEAR_ZERO_PU = 1e-9
SERIES_MIN_BASELINE_ERROR = 0.05
DEFAULT_KV_BANDS = (
    ("all", 0.0, math.inf),
    (">=200", 200.0, math.inf),
    ("100-200", 100.0, 200.0),
    ("20-100", 20.0, 100.0),
    ("<20", 0.0, 20.0),
)
# (baseline, improved) pairs for improvement rows
DEFAULT_MODEL_PAIRS = (("dc", "ddc"), ("lac", "dlac"))

# Regression reporting
VIF_THRESHOLD = 3.0
P_VALUE_FLOOR = 2.2e-16
COLLINEAR_TOL = 1e-12
EXACT_FIT_RATIO = 1e-20

# Scenario defaults
DEFAULT_HOURS = 72
DEFAULT_AMPLITUDE = 0.15
DEFAULT_PHASE_HOURS = 18.0
DEFAULT_NOISE_SD = 0.01
DEFAULT_LAMBDA_BOUNDS = (0.7, 1.3)
DEFAULT_SEED = 0

# Models
AC_MODEL = "ac"
LINEAR_MODELS = ("dc", "ddc", "lac", "dlac")
VALID_MODELS = (AC_MODEL, *LINEAR_MODELS)
DATA_DRIVEN_MODELS = ("ddc", "dlac")
DEFAULT_EVAL_MODELS = LINEAR_MODELS
VALID_REPORT_FORMATS = ("csv", "md", "json")

VALID_DIAGNOSTIC_SEVERITIES = {"ERROR", "WARN", "INFO"}

# Environment
THREADS_ENV = "LACFLOW_THREADS"

# Output file names
MANIFEST_FILENAME = "manifest.json"
COEFFS_FILENAME = "coefficients.json"
FIT_DIAGNOSTICS_FILENAME = "diagnostics.json"
REPORT_MD_FILENAME = "report.md"
FAILURES_FILENAME = "failures.json"
HOUR_FILE_TEMPLATE = "hour_{hour:03d}.json"

__all__ = [
    "DEFAULT_BASE_MVA",
    "DEFAULT_AC_TOL",
    "DEFAULT_AC_MAX_ITER",
    "DEFAULT_Q_LIMIT_ROUNDS",
    "DIVERGENCE_MISMATCH",
    "DEFAULT_REFINE_TOL",
    "DEFAULT_REFINE_PASSES",
    "DEFAULT_TOLERANCES_MW",
    "DEFAULT_TOLERANCES_MVAR",
    "DEFAULT_TOL_MVA",
    "NEAR_ZERO_PU",
    "SERIES_MIN_BASELINE_ERROR",
    "DEFAULT_KV_BANDS",
    "DEFAULT_MODEL_PAIRS",
    "VIF_THRESHOLD",
    "P_VALUE_FLOOR",
    "COLLINEAR_TOL",
    "EXACT_FIT_RATIO",
    "DEFAULT_HOURS",
    "DEFAULT_AMPLITUDE",
    "DEFAULT_PHASE_HOURS",
    "DEFAULT_NOISE_SD",
    "DEFAULT_LAMBDA_BOUNDS",
    "DEFAULT_SEED",
    "AC_MODEL",
    "LINEAR_MODELS",
    "VALID_MODELS",
    "DATA_DRIVEN_MODELS",
    "DEFAULT_EVAL_MODELS",
    "VALID_REPORT_FORMATS",
    "VALID_DIAGNOSTIC_SEVERITIES",
    "THREADS_ENV",
    "MANIFEST_FILENAME",
    "COEFFS_FILENAME",
    "FIT_DIAGNOSTICS_FILENAME",
    "REPORT_MD_FILENAME",
    "FAILURES_FILENAME",
    "HOUR_FILE_TEMPLATE",
]
