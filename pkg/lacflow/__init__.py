"""lacflow: linearized AC power flow models and their accuracy against the full AC solution.

Primary entry points are through submodules:
  - lacflow.cli: Command-line interface
  - lacflow.grid: Network model and case file readers/writers
  - lacflow.solvers: AC Newton-Raphson and the DC/DDC/LAC/DLAC linear models
  - lacflow.regression: Least-squares fitting of the data-driven coefficients
  - lacflow.metrics: Accuracy tables against the AC reference
  - lacflow.scenarios: Synthetic hourly operating cases
"""

__version__ = "0.1.0"

__all__ = [
    "cli",
    "config",
    "diagnostics",
    "fs",
    "constants",
    "types",
    "grid",
    "solvers",
    "regression",
    "metrics",
    "scenarios",
]
