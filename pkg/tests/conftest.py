"""Pytest configuration and shared fixtures for lacflow tests."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from lacflow.diagnostics import DiagnosticCollector  # noqa: E402
from lacflow.fs import LocalFS  # noqa: E402
from lacflow.grid.case_io import load_case  # noqa: E402
from lacflow.grid.network import Branch, Bus, BusKind, Generator, Network  # noqa: E402
from lacflow.regression.datasets import DesignMatrix  # noqa: E402

CASES_DIR = ROOT / "lacflow" / "cases"


class FakeFS:
    """In-memory filesystem adapter; directories exist implicitly."""

    def __init__(self) -> None:
        self.store: dict[Path, str] = {}
        self.writes: list[Path] = []

    def read_text(self, path: Path) -> str:
        try:
            return self.store[Path(path)]
        except KeyError as exc:
            raise FileNotFoundError(f"Cannot read file (not found): {path}") from exc

    def write_text(self, path: Path, data: str) -> None:
        self.writes.append(Path(path))
        self.store[Path(path)] = data

    def read_file(self, path: Path) -> bytes:
        return self.read_text(path).encode("utf-8")

    def exists(self, path: Path) -> bool:
        return self.is_file(path) or self.is_dir(path)

    def is_file(self, path: Path) -> bool:
        return Path(path) in self.store

    def is_dir(self, path: Path) -> bool:
        path = Path(path)
        return any(path in stored.parents for stored in self.store)

    def makedirs(self, path: Path) -> None:
        # No-op for fake filesystem
        return None

    def list_dir(self, path: Path) -> list[Path]:
        path = Path(path)
        return sorted(p for p in self.store if p.parent == path)


def two_bus_network() -> Network:
    """Slack bus 1 feeding 100 MW at bus 2 over a lossless x = 0.1 line."""
    return Network(
        buses=(
            Bus(1, BusKind.SLACK, base_kv=138.0),
            Bus(2, BusKind.PQ, p_load=1.0, base_kv=138.0),
        ),
        generators=(Generator(1, p_gen=1.0, v_set=1.0),),
        branches=(Branch(1, 2, r=0.0, x=0.1),),
        name="two_bus",
    )


def triangle_network() -> Network:
    """Three buses in a ring: slack, PV generator and a PQ load."""
    return Network(
        buses=(
            Bus(1, BusKind.SLACK, base_kv=230.0),
            Bus(2, BusKind.PV, base_kv=230.0),
            Bus(3, BusKind.PQ, p_load=1.5, q_load=0.5, base_kv=115.0),
        ),
        generators=(
            Generator(1, p_gen=0.8, v_set=1.04),
            Generator(2, p_gen=0.7, v_set=1.02),
        ),
        branches=(
            Branch(1, 2, r=0.01, x=0.08, b_charging=0.02),
            Branch(2, 3, r=0.02, x=0.12, b_charging=0.03),
            Branch(1, 3, r=0.015, x=0.1, b_charging=0.025),
        ),
        name="triangle",
    )


@pytest.fixture
def fake_fs() -> FakeFS:
    """Provide a fake filesystem for testing without I/O."""
    return FakeFS()


@pytest.fixture
def fs_adapter() -> LocalFS:
    return LocalFS()


@pytest.fixture
def diagnostic_collector() -> DiagnosticCollector:
    return DiagnosticCollector()


@pytest.fixture
def two_bus() -> Network:
    return two_bus_network()


@pytest.fixture
def triangle() -> Network:
    return triangle_network()


@pytest.fixture(scope="session")
def case9() -> Network:
    return load_case(CASES_DIR / "case9.m")


@pytest.fixture(scope="session")
def case14() -> Network:
    return load_case(CASES_DIR / "case14.m")


@pytest.fixture
def regression_corpus() -> DesignMatrix:
    """Ten observations of y = 2*x1 - 0.5*x2 plus a fixed disturbance."""
    x1 = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0])
    x2 = np.array([2.0, 1.0, 4.0, 3.0, 6.0, 5.0, 8.0, 7.0, 10.0, 9.0])
    noise = np.array([0.1, -0.2, 0.05, 0.15, -0.1, 0.2, -0.05, -0.15, 0.1, -0.1])
    y = 2.0 * x1 - 0.5 * x2 + noise
    return DesignMatrix(x=np.column_stack([x1, x2]), y=y, names=("x1", "x2"), label="corpus")
