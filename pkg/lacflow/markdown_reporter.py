"""Markdown rendering of evaluation and regression reports.

Reports carry no timestamps so that identical runs produce identical files.
"""

from __future__ import annotations

import math
from typing import Any, Mapping, Optional, Sequence

from lacflow.diagnostics import DiagnosticCollector
from lacflow.metrics.tables import ReportTable
from lacflow.regression.distributions import format_p_value
from lacflow.reports import P_VALUE_COLUMNS


def format_cell(value: Any, column: str = "") -> str:
    if value is None:
        return "n/a"
    if isinstance(value, bool):
        return "yes" if value else ""
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if column in P_VALUE_COLUMNS:
            return format_p_value(value)
        if math.isnan(value):
            return "n/a"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.6g}"
    return str(value).replace("|", "\\|")


def render_table(table: ReportTable, *, level: int = 3) -> str:
    header = "| " + " | ".join(c.replace("|", "\\|") for c in table.columns) + " |"
    rule = "|" + "|".join("---" for _ in table.columns) + "|"
    lines = [f"{'#' * level} {table.title}", "", header, rule]
    for row in table.rows:
        cells = [format_cell(v, c) for v, c in zip(row, table.columns)]
        lines.append("| " + " | ".join(cells) + " |")
    if table.notes:
        lines.append("")
        lines.extend(f"- {note}" for note in table.notes)
    return "\n".join(lines) + "\n"


class MarkdownReporter:
    """Build the Markdown report written next to ``eval`` and ``fit`` outputs."""

    def __init__(self, title: str) -> None:
        self.title = title

    def generate_eval_report(
        self,
        *,
        summary: Mapping[str, Any],
        multi_hour: Optional[ReportTable],
        hour_tables: Mapping[int, Sequence[ReportTable]],
        failures: Sequence[Mapping[str, Any]],
        diagnostics: Optional[DiagnosticCollector] = None,
    ) -> str:
        sections = [
            self._header_section(),
            self._summary_section(summary),
            self._multi_hour_section(multi_hour),
            self._hours_section(hour_tables),
            self._failures_section(failures),
            self._diagnostics_section(diagnostics),
        ]
        return "\n\n".join(filter(None, sections)).rstrip("\n") + "\n"

    def generate_fit_report(
        self,
        *,
        summary: Mapping[str, Any],
        coefficients: ReportTable,
        tables: Sequence[ReportTable],
    ) -> str:
        sections = [
            self._header_section(),
            self._summary_section(summary),
            render_table(coefficients, level=2),
            "## Regression diagnostics",
            *(render_table(t) for t in tables),
        ]
        return "\n\n".join(filter(None, sections)).rstrip("\n") + "\n"

    def _header_section(self) -> str:
        return f"# {self.title}\n"

    def _summary_section(self, summary: Mapping[str, Any]) -> str:
        lines = [f"- **{key}:** {format_cell(value)}" for key, value in summary.items()]
        return "## Summary\n\n" + "\n".join(lines) + "\n"

    def _multi_hour_section(self, table: Optional[ReportTable]) -> str:
        if table is None:
            return ""
        return render_table(table, level=2)

    def _hours_section(self, hour_tables: Mapping[int, Sequence[ReportTable]]) -> str:
        if not hour_tables:
            return ""
        parts = ["## Hourly results"]
        for hour in sorted(hour_tables):
            parts.append(f"### Hour {hour}")
            parts.extend(render_table(t, level=4) for t in hour_tables[hour])
        return "\n\n".join(parts)

    def _failures_section(self, failures: Sequence[Mapping[str, Any]]) -> str:
        if not failures:
            return "## Failures\n\nNone.\n"
        lines = ["## Failures", "", "| hour | code | message |", "|---|---|---|"]
        for failure in failures:
            lines.append(
                f"| {failure['hour']} | {failure['code']} | {format_cell(failure['message'])} |"
            )
        return "\n".join(lines) + "\n"

    def _diagnostics_section(self, diagnostics: Optional[DiagnosticCollector]) -> str:
        if diagnostics is None or not diagnostics.diagnostics:
            return ""
        lines = ["## Diagnostics", ""]
        for diag in diagnostics.diagnostics:
            where = f" ({diag.location})" if diag.location else ""
            lines.append(f"- **{diag.severity}** `{diag.code}`: {diag.message}{where}")
        return "\n".join(lines) + "\n"


__all__ = ["MarkdownReporter", "format_cell", "render_table"]
