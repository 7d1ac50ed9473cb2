"""Tests for configuration module."""

from __future__ import annotations
