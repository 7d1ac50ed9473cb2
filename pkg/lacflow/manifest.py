"""Run manifests: one ``manifest.json`` per output directory, holding an append-only list of runs.

Timestamps and durations appear only here; every other artifact is a pure function of
its inputs.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, Optional

from lacflow import __version__
from lacflow.constants import MANIFEST_FILENAME
from lacflow.exceptions import ConfigFileError
from lacflow.fs import FileSystemAdapter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunManifest:
    """One run record.

    Attributes:
        command: subcommand name
        inputs: input role -> path
        options: effective option values
        artifacts: path relative to the manifest directory -> sha256 hex digest
        tool_version: lacflow version that produced the artifacts
        started_at: ISO-8601 UTC start time
        duration_s: wall-clock duration in seconds
        exit_code: process exit code of the run
    """

    command: str
    inputs: dict[str, Any]
    options: dict[str, Any]
    artifacts: dict[str, str]
    tool_version: str = __version__
    started_at: str = ""
    duration_s: float = 0.0
    exit_code: int = 0
    correlation_id: Optional[str] = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def sha256_of(path: Path, fs: FileSystemAdapter) -> str:
    return hashlib.sha256(fs.read_file(path)).hexdigest()


def _relative(path: Path, root: Path) -> str:
    try:
        return path.relative_to(root).as_posix()
    except ValueError:
        return path.as_posix()


def hash_artifacts(paths: Iterable[Path], root: Path, fs: FileSystemAdapter) -> dict[str, str]:
    """Digest each artifact, keyed by its path relative to ``root`` in sorted order."""
    digests = {_relative(Path(p), root): sha256_of(Path(p), fs) for p in paths}
    return dict(sorted(digests.items()))


def read_manifest(out_dir: Path, fs: FileSystemAdapter) -> dict[str, Any]:
    path = out_dir / MANIFEST_FILENAME
    if not fs.exists(path):
        return {"runs": []}
    try:
        document = json.loads(fs.read_text(path))
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"manifest {path} is not valid JSON: {exc.msg}") from exc
    if not isinstance(document, dict) or not isinstance(document.get("runs"), list):
        raise ConfigFileError(f"manifest {path} has no runs list")
    return document


def append_run(out_dir: Path, record: RunManifest, fs: FileSystemAdapter) -> Path:
    """Append ``record`` to the directory's manifest, creating it on first use."""
    document = read_manifest(out_dir, fs)
    document["runs"].append(record.to_dict())
    path = out_dir / MANIFEST_FILENAME
    fs.makedirs(out_dir)
    fs.write_text(path, json.dumps(document, indent=2, sort_keys=True) + "\n")
    logger.info("manifest updated", extra={"path": str(path), "runs": len(document["runs"])})
    return path


def utc_timestamp(now: datetime) -> str:
    return now.isoformat(timespec="seconds")


__all__ = [
    "RunManifest",
    "sha256_of",
    "hash_artifacts",
    "read_manifest",
    "append_run",
    "utc_timestamp",
]
