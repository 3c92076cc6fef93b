"""Locks for cooperative tasks: benchmark harness and correctness oracles."""

from ._core import (
    CSV_HEADER,
    BackoffConfig,
    BenchConfig,
    BenchmarkRecord,
    ConfigError,
    OracleReport,
    Scenario,
    check_backoff_ladder,
    check_deadlock_freedom,
    check_fifo_order,
    check_handshake_interleavings,
    check_mutual_exclusion,
    compute_quantiles,
    ladder,
    lock_name,
    parse_csv_row,
    parse_strategy,
    power_of_two_task_counts,
    read_csv,
    record_ladder,
    run_benchmark,
    summarize_medians,
    write_csv,
)

__all__ = [
    "CSV_HEADER",
    "BackoffConfig",
    "BenchConfig",
    "BenchmarkRecord",
    "ConfigError",
    "OracleReport",
    "Scenario",
    "check_backoff_ladder",
    "check_deadlock_freedom",
    "check_fifo_order",
    "check_handshake_interleavings",
    "check_mutual_exclusion",
    "compute_quantiles",
    "ladder",
    "lock_name",
    "parse_csv_row",
    "parse_strategy",
    "power_of_two_task_counts",
    "read_csv",
    "record_ladder",
    "run_benchmark",
    "summarize_medians",
    "write_csv",
]
