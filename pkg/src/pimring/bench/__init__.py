"""Benchmark scenarios, correctness self-checks and parameter sweeps."""

from .scenario import PLATFORM_NAMES, PRESET_NAMES, Scenario, run_scenario
from .selfcheck import SUITES, CheckResult, VerifyReport, corrupt_tables, verify
from .sweep import (
    CSV_COLUMNS,
    DEFAULT_POINTS,
    SCHEMA_VERSION,
    SweepAxis,
    SweepResult,
    evaluate_point,
    result_row,
    run_sweep,
    write_csv,
    write_svg,
)

__all__ = [
    # Scenarios
    "Scenario",
    "PRESET_NAMES",
    "PLATFORM_NAMES",
    "run_scenario",
    # Self-checks
    "SUITES",
    "CheckResult",
    "VerifyReport",
    "corrupt_tables",
    "verify",
    # Sweeps
    "SweepAxis",
    "SweepResult",
    "CSV_COLUMNS",
    "DEFAULT_POINTS",
    "SCHEMA_VERSION",
    "evaluate_point",
    "result_row",
    "run_sweep",
    "write_csv",
    "write_svg",
]
