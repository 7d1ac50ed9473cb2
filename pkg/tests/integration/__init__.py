"""Integration tests for lacflow: scenario generation, fitting and evaluation together."""
