"""Case file ingestion and export.

Two formats are understood: the native JSON document (validated against
``case_schema.json``) and MATPOWER text cases (``mpc.baseMVA``, ``mpc.bus``,
``mpc.gen``, ``mpc.branch``). Physical units stop at this boundary; everything
returned is per-unit and radians.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from lacflow.constants import DEFAULT_BASE_MVA
from lacflow.exceptions import CaseParseError, CaseValidationError
from lacflow.fs import FileSystemAdapter, LocalFS
from lacflow.grid.network import Branch, Bus, BusKind, Generator, Network, validate
from lacflow.schema_validator import validate_case_document

logger = logging.getLogger(__name__)

NATIVE = "native"
MATPOWER = "matpower"

# MATPOWER column positions (0-based)
BUS_I, BUS_TYPE, PD, QD, GS, BS, BUS_AREA, VM, VA, BASE_KV = range(10)
GEN_BUS, PG, QG, QMAX, QMIN, VG, MBASE, GEN_STATUS = range(8)
F_BUS, T_BUS, BR_R, BR_X, BR_B, RATE_A, RATE_B, RATE_C, TAP, SHIFT, BR_STATUS = range(11)

_BUS_COLUMNS = ("BUS_I", "BUS_TYPE", "PD", "QD", "GS", "BS", "BUS_AREA", "VM", "VA", "BASE_KV")
_GEN_COLUMNS = ("GEN_BUS", "PG", "QG", "QMAX", "QMIN", "VG", "MBASE", "GEN_STATUS")
_BRANCH_COLUMNS = (
    "F_BUS", "T_BUS", "BR_R", "BR_X", "BR_B", "RATE_A", "RATE_B", "RATE_C", "TAP", "SHIFT",
    "BR_STATUS",
)
_REQUIRED = {"bus": _BUS_COLUMNS, "gen": _GEN_COLUMNS, "branch": _BRANCH_COLUMNS}
_MATPOWER_KINDS = {1: BusKind.PQ, 2: BusKind.PV, 3: BusKind.SLACK}

_MATRIX_START = re.compile(r"^\s*mpc\.(\w+)\s*=\s*[\[{]")
_SCALAR = re.compile(r"^\s*mpc\.(\w+)\s*=\s*([^;\[{]+);")


@dataclass
class MatpowerCase:
    """Parsed MATPOWER content before conversion to a Network."""

    base_mva: float = DEFAULT_BASE_MVA
    matrices: dict[str, list[tuple[int, list[float]]]] = field(default_factory=dict)
    ignored_sections: list[str] = field(default_factory=list)


def detect_format(path: Path) -> str:
    return MATPOWER if path.suffix.lower() == ".m" else NATIVE


def load_case(
    path: Path | str,
    format: Optional[str] = None,
    *,
    fs: Optional[FileSystemAdapter] = None,
) -> Network:
    """Read, convert and validate a case file.

    Raises:
        CaseParseError: malformed content, with line and field where known
        CaseValidationError: parsed network violates an invariant
    """
    path = Path(path)
    fs = fs or LocalFS()
    fmt = format or detect_format(path)
    text = fs.read_text(path)
    if fmt == MATPOWER:
        network = matpower_to_network(parse_matpower(text), name=path.stem)
    elif fmt == NATIVE:
        network = parse_native(text, name=path.stem)
    else:
        raise CaseParseError(f"unknown case format {fmt!r}")
    ensure_valid(network)
    logger.info(
        "case loaded",
        extra={"case": network.name, "buses": network.n_bus, "branches": len(network.branches)},
    )
    return network


def ensure_valid(network: Network) -> Network:
    violations = validate(network)
    if violations:
        raise CaseValidationError(violations)
    return network


# -- native format ---------------------------------------------------------------------


def parse_native(text: str, *, name: str = "") -> Network:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CaseParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    validate_case_document(document)
    return network_from_document(document, name=name)


def _angle(raw: dict[str, Any], key: str) -> float:
    """Radians from ``<key>_rad`` when present, else from ``<key>_deg``."""
    if f"{key}_rad" in raw:
        return float(raw[f"{key}_rad"])
    return math.radians(raw.get(f"{key}_deg", 0.0))


def network_from_document(document: dict[str, Any], *, name: str = "") -> Network:
    """Network from a validated native document; the document's own ``name`` wins over ``name``."""
    base = float(document.get("base_mva", DEFAULT_BASE_MVA))
    buses = [
        Bus(
            id=int(raw["id"]),
            kind=BusKind(raw["kind"]) if "kind" in raw else None,
            p_load=raw.get("p_load_mw", 0.0) / base,
            q_load=raw.get("q_load_mvar", 0.0) / base,
            g_shunt=raw.get("gs_mw", 0.0) / base,
            b_shunt=raw.get("bs_mvar", 0.0) / base,
            base_kv=float(raw.get("base_kv", 1.0)),
            v_init=float(raw.get("vm", 1.0)),
            a_init=_angle(raw, "va"),
        )
        for raw in document["buses"]
    ]
    generators = [
        Generator(
            bus=int(raw["bus"]),
            p_gen=raw.get("pg_mw", 0.0) / base,
            q_gen=raw.get("qg_mvar", 0.0) / base,
            v_set=float(raw.get("v_set", 1.0)),
            q_min=raw["q_min_mvar"] / base if "q_min_mvar" in raw else -math.inf,
            q_max=raw["q_max_mvar"] / base if "q_max_mvar" in raw else math.inf,
            in_service=bool(raw.get("status", 1)),
        )
        for raw in document.get("generators", [])
    ]
    branches = [
        Branch(
            from_bus=int(raw["from"]),
            to_bus=int(raw["to"]),
            r=float(raw.get("r", 0.0)),
            x=float(raw["x"]),
            b_charging=float(raw.get("b", 0.0)),
            tap=float(raw.get("tap", 1.0)) or 1.0,
            shift=_angle(raw, "shift"),
            rate_a=float(raw.get("rate_a_mva", 0.0)),
            in_service=bool(raw.get("status", 1)),
        )
        for raw in document["branches"]
    ]
    return Network(
        buses=tuple(buses),
        generators=tuple(generators),
        branches=tuple(branches),
        base_mva=base,
        name=document.get("name", name),
    )


def network_to_document(network: Network) -> dict[str, Any]:
    """Native JSON document for a network (physical units; angles in degrees and radians)."""
    base = network.base_mva
    buses = []
    for bus in network.buses:
        entry: dict[str, Any] = {"id": bus.id}
        if bus.kind is not None:
            entry["kind"] = bus.kind.value
        entry.update(
            p_load_mw=bus.p_load * base,
            q_load_mvar=bus.q_load * base,
            gs_mw=bus.g_shunt * base,
            bs_mvar=bus.b_shunt * base,
            base_kv=bus.base_kv,
            vm=bus.v_init,
            va_deg=math.degrees(bus.a_init),
            va_rad=bus.a_init,
        )
        buses.append(entry)
    generators = []
    for gen in network.generators:
        entry = {
            "bus": gen.bus,
            "pg_mw": gen.p_gen * base,
            "qg_mvar": gen.q_gen * base,
            "v_set": gen.v_set,
            "status": int(gen.in_service),
        }
        if math.isfinite(gen.q_min):
            entry["q_min_mvar"] = gen.q_min * base
        if math.isfinite(gen.q_max):
            entry["q_max_mvar"] = gen.q_max * base
        generators.append(entry)
    branches = [
        {
            "from": br.from_bus,
            "to": br.to_bus,
            "r": br.r,
            "x": br.x,
            "b": br.b_charging,
            "tap": br.tap,
            "shift_deg": math.degrees(br.shift),
            "shift_rad": br.shift,
            "rate_a_mva": br.rate_a,
            "status": int(br.in_service),
        }
        for br in network.branches
    ]
    document: dict[str, Any] = {"base_mva": base}
    if network.name:
        document["name"] = network.name
    document.update(buses=buses, generators=generators, branches=branches)
    return document


def dumps_native(network: Network) -> str:
    return json.dumps(network_to_document(network), indent=2) + "\n"


def save_case(network: Network, path: Path | str, *, fs: Optional[FileSystemAdapter] = None) -> Path:
    """Write ``network`` in the native format."""
    path = Path(path)
    fs = fs or LocalFS()
    fs.makedirs(path.parent)
    fs.write_text(path, dumps_native(network))
    return path


# -- MATPOWER ----------------------------------------------------------------------------


def _strip_comment(line: str) -> str:
    return line.split("%", 1)[0]


def _parse_row(chunk: str, matrix: str, line_no: int) -> list[float]:
    values = []
    for pos, token in enumerate(chunk.replace(",", " ").split()):
        try:
            values.append(float(token))
        except ValueError as exc:
            raise CaseParseError(
                f"non-numeric value {token!r} in mpc.{matrix}",
                line=line_no,
                field=_column_name(matrix, pos),
            ) from exc
    return values


def _column_name(matrix: str, pos: int) -> str:
    names = _REQUIRED.get(matrix, ())
    return names[pos] if pos < len(names) else f"{matrix} column {pos + 1}"


def parse_matpower(text: str) -> MatpowerCase:
    """Line-oriented reader for MATPOWER case text.

    Rows may end with ``;`` or a newline; ``%`` starts a comment. Sections other than
    bus, gen and branch are recorded in ``ignored_sections``.
    """
    case = MatpowerCase()
    current: Optional[str] = None
    rows: list[tuple[int, list[float]]] = []
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw_line)
        if current is None:
            scalar = _SCALAR.match(line)
            if scalar and scalar.group(1) == "baseMVA":
                try:
                    case.base_mva = float(scalar.group(2))
                except ValueError as exc:
                    raise CaseParseError("invalid baseMVA", line=line_no, field="baseMVA") from exc
                continue
            start = _MATRIX_START.match(line)
            if not start:
                continue
            current, rows = start.group(1), []
            line = line[start.end():]
        closing = re.search(r"[\]}]", line)
        body = line[: closing.start()] if closing else line
        for chunk in body.split(";"):
            if chunk.strip() and current in _REQUIRED:
                rows.append((line_no, _parse_row(chunk, current, line_no)))
        if closing:
            if current in _REQUIRED:
                case.matrices[current] = rows
            else:
                case.ignored_sections.append(current)
            current = None
    if current is not None:
        raise CaseParseError(f"unterminated matrix mpc.{current}", line=len(text.splitlines()))
    for matrix in ("bus", "branch"):
        if matrix not in case.matrices:
            raise CaseParseError(f"missing matrix mpc.{matrix}", field=matrix)
    return case


def _require_columns(matrix: str, rows: list[tuple[int, list[float]]]) -> None:
    needed = len(_REQUIRED[matrix])
    for line_no, row in rows:
        if len(row) < needed:
            raise CaseParseError(
                f"mpc.{matrix} row has {len(row)} columns",
                line=line_no,
                field=_REQUIRED[matrix][len(row)],
            )


def matpower_to_network(case: MatpowerCase, *, name: str = "") -> Network:
    for matrix, rows in case.matrices.items():
        _require_columns(matrix, rows)
    for section in case.ignored_sections:
        logger.info("ignoring MATPOWER section", extra={"section": section})
    base = case.base_mva
    buses = []
    for line_no, row in case.matrices["bus"]:
        code = int(row[BUS_TYPE])
        if code not in _MATPOWER_KINDS:
            raise CaseParseError(f"unsupported bus type {code}", line=line_no, field="BUS_TYPE")
        buses.append(
            Bus(
                id=int(row[BUS_I]),
                kind=_MATPOWER_KINDS[code],
                p_load=row[PD] / base,
                q_load=row[QD] / base,
                g_shunt=row[GS] / base,
                b_shunt=row[BS] / base,
                base_kv=row[BASE_KV],
                v_init=row[VM],
                a_init=math.radians(row[VA]),
            )
        )
    generators = [
        Generator(
            bus=int(row[GEN_BUS]),
            p_gen=row[PG] / base,
            q_gen=row[QG] / base,
            v_set=row[VG],
            q_min=row[QMIN] / base,
            q_max=row[QMAX] / base,
            in_service=row[GEN_STATUS] > 0,
        )
        for _, row in case.matrices.get("gen", [])
    ]
    branches = [
        Branch(
            from_bus=int(row[F_BUS]),
            to_bus=int(row[T_BUS]),
            r=row[BR_R],
            x=row[BR_X],
            b_charging=row[BR_B],
            tap=row[TAP] if row[TAP] != 0.0 else 1.0,
            shift=math.radians(row[SHIFT]),
            rate_a=row[RATE_A],
            in_service=row[BR_STATUS] > 0,
        )
        for _, row in case.matrices["branch"]
    ]
    return Network(
        buses=tuple(buses),
        generators=tuple(generators),
        branches=tuple(branches),
        base_mva=base,
        name=name,
    )
