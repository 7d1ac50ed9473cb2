"""Tests for diagnostics module."""

from __future__ import annotations
