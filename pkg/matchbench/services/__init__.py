"""
matchbench - Services Package
"""

from .baseline_service import BaselineResult, compare_metrics, run_baseline
from .evaluation_service import (
    MetricRow,
    combination_tables,
    combine,
    consistency,
    decisiveness_table,
    evaluate,
    evaluate_records,
    median_table,
)
from .experiment_service import (
    SuiteConfig,
    load_records,
    replay_record,
    run_experiment,
    run_suite,
    verify_records,
)
from .response_store import RawResponse, ResponseStore

__all__ = [
    "BaselineResult",
    "compare_metrics",
    "run_baseline",
    "MetricRow",
    "combination_tables",
    "combine",
    "consistency",
    "decisiveness_table",
    "evaluate",
    "evaluate_records",
    "median_table",
    "SuiteConfig",
    "load_records",
    "replay_record",
    "run_experiment",
    "run_suite",
    "verify_records",
    "RawResponse",
    "ResponseStore",
]
