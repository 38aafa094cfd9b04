"""Run artifacts and report tables."""

from src.reports.tables import render_report
from src.reports.writers import (
    build_summary,
    fault_summary,
    prepare_output_dir,
    read_summary,
    to_jsonable,
    write_json,
    write_run,
)

__all__ = [
    "render_report",
    "build_summary",
    "fault_summary",
    "prepare_output_dir",
    "read_summary",
    "to_jsonable",
    "write_json",
    "write_run",
]
