from lacflow.metrics.errors import abs_dev_stats, filtered_mape, improvement
from lacflow.metrics.tables import (
    ReportTable,
    complex_power_report,
    flow_error_table,
    multi_hour_report,
    voltage_error_table,
)

__all__ = [
    "filtered_mape",
    "improvement",
    "abs_dev_stats",
    "ReportTable",
    "flow_error_table",
    "voltage_error_table",
    "complex_power_report",
    "multi_hour_report",
]
