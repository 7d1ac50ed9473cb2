"""Tests for the diagnostic code registry."""

from __future__ import annotations

import inspect

import pytest

from lacflow import exceptions
from lacflow.diagnostic_codes import (
    DiagnosticCode,
    DiagnosticMetadata,
    generate_documentation,
    get_metadata,
    is_valid_code,
    list_codes_by_category,
)


def _exception_classes():
    return [
        obj
        for _, obj in inspect.getmembers(exceptions, inspect.isclass)
        if issubclass(obj, exceptions.LacflowError)
    ]


@pytest.mark.parametrize("exc_class", _exception_classes(), ids=lambda c: c.__name__)
def test_every_exception_code_is_registered(exc_class):
    assert is_valid_code(exc_class.code)


def test_metadata_lookup():
    meta = get_metadata("AC_DIVERGENCE")
    assert meta.category == "SOLVER"
    assert meta.default_severity == "ERROR"
    assert get_metadata("HOUR_INFEASIBLE").default_severity == "WARN"


def test_unknown_codes():
    assert not is_valid_code("NOT_A_CODE")
    with pytest.raises(ValueError):
        get_metadata("NOT_A_CODE")


def test_metadata_rejects_bad_severity():
    with pytest.raises(ValueError):
        DiagnosticMetadata("X", "CLI", "FATAL", "nope")


def test_codes_grouped_by_category():
    grouped = list_codes_by_category()
    assert "CASE_MISSING" in grouped["CASE"]
    assert list(grouped) == sorted(grouped)
    assert sum(len(codes) for codes in grouped.values()) == len(DiagnosticCode)


def test_documentation_lists_every_code():
    text = generate_documentation()
    assert text.startswith("# Diagnostic Codes")
    for code in DiagnosticCode:
        assert f"`{code.value}`" in text
