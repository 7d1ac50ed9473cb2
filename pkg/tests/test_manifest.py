"""Tests for run manifests."""

from __future__ import annotations

import hashlib
import json
from datetime import datetime, timezone
from pathlib import Path

import pytest

from lacflow import __version__
from lacflow.exceptions import ConfigFileError
from lacflow.manifest import RunManifest, append_run, hash_artifacts, read_manifest, utc_timestamp


def _record(command: str = "solve") -> RunManifest:
    return RunManifest(
        command=command,
        inputs={"case": "case9.m"},
        options={"model": "dc"},
        artifacts={},
        started_at="2024-01-01T00:00:00+00:00",
    )


def test_runs_are_appended(fake_fs):
    out = Path("out")
    append_run(out, _record("solve"), fake_fs)
    path = append_run(out, _record("fit"), fake_fs)
    document = json.loads(fake_fs.read_text(path))
    assert [run["command"] for run in document["runs"]] == ["solve", "fit"]
    assert document["runs"][0]["tool_version"] == __version__


def test_artifact_digests_are_relative_and_sorted(fake_fs):
    fake_fs.write_text(Path("out/tables/b.csv"), "b\n")
    fake_fs.write_text(Path("out/a.json"), "{}\n")
    digests = hash_artifacts([Path("out/tables/b.csv"), Path("out/a.json")], Path("out"), fake_fs)
    assert list(digests) == ["a.json", "tables/b.csv"]
    assert digests["a.json"] == hashlib.sha256(b"{}\n").hexdigest()


def test_paths_outside_root_stay_absolute(fake_fs):
    fake_fs.write_text(Path("elsewhere/x.json"), "1")
    assert list(hash_artifacts([Path("elsewhere/x.json")], Path("out"), fake_fs)) == ["elsewhere/x.json"]


def test_missing_manifest_reads_empty(fake_fs):
    assert read_manifest(Path("nowhere"), fake_fs) == {"runs": []}


@pytest.mark.parametrize("content", ["not json", '{"runs": 3}', "[]"])
def test_corrupt_manifest(fake_fs, content):
    fake_fs.write_text(Path("out/manifest.json"), content)
    with pytest.raises(ConfigFileError):
        read_manifest(Path("out"), fake_fs)


def test_timestamp_is_seconds_precision():
    now = datetime(2024, 5, 6, 7, 8, 9, 123456, tzinfo=timezone.utc)
    assert utc_timestamp(now) == "2024-05-06T07:08:09+00:00"
