"""
Dataset files, JSON reports and plot-ready tables
"""
from .csv_io import read_csv, write_csv
from .reports import (
    REPORT_FIELDS,
    build_report,
    dumps_report,
    rate_plot_frame,
    replications_frame,
    scoreboard_frame,
    to_jsonable,
    write_report,
    write_table,
)

__all__ = [
    "REPORT_FIELDS",
    "build_report",
    "dumps_report",
    "rate_plot_frame",
    "read_csv",
    "replications_frame",
    "scoreboard_frame",
    "to_jsonable",
    "write_csv",
    "write_report",
    "write_table",
]
