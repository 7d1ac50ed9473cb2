from lacflow.grid.case_io import load_case, save_case
from lacflow.grid.network import (
    Branch,
    Bus,
    BusKind,
    Generator,
    Network,
    PiModel,
    pi_equivalent,
    series_admittance,
    validate,
)

__all__ = [
    "Bus",
    "BusKind",
    "Branch",
    "Generator",
    "Network",
    "PiModel",
    "series_admittance",
    "pi_equivalent",
    "validate",
    "load_case",
    "save_case",
]
