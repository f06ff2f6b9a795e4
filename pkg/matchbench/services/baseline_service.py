"""
matchbench - Baseline Service
Name-similarity baseline: best-F1 threshold per dataset, baseline records
for the evaluation tables and pooled precision-recall comparison of metrics.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Union

from ..config.constants import BASELINE_MODEL, DEFAULT_RUNS
from ..core.errors import EmptyTruth
from ..core.similarity import (
    Metric,
    PrCurve,
    ThresholdResult,
    baseline_matching,
    best_threshold,
    pr_curve,
    score_benchmark,
    score_dataset,
)
from ..models.results import ExperimentRecord
from ..models.schemas import Benchmark
from ..utils.logging_utils import get_logger
from .evaluation_service import MetricRow, evaluate

logger = get_logger("baseline")


@dataclass
class BaselineResult:
    metric: Metric
    thresholds: Dict[str, ThresholdResult] = field(default_factory=dict)
    rows: List[MetricRow] = field(default_factory=list)
    records: List[ExperimentRecord] = field(default_factory=list)


def run_baseline(
    benchmark: Benchmark,
    metric: Union[str, Metric] = Metric.NGRAM,
    runs: int = DEFAULT_RUNS,
) -> BaselineResult:
    """
    Threshold each dataset at its best-F1 score and evaluate.

    The baseline is deterministic, so its record is repeated `runs` times to
    line up with LLM methods in combination tables.
    """
    metric = Metric.parse(metric)
    result = BaselineResult(metric=metric)

    for d in benchmark.datasets:
        scores = score_dataset(metric, d)
        truth = benchmark.truth(d.id)
        try:
            best = best_threshold(scores, truth)
            theta = best.theta
            result.thresholds[d.id] = best
        except EmptyTruth:
            logger.warning("[%s] no true matches; baseline predicts no match", d.id)
            theta = float("inf")

        matching = baseline_matching(scores, theta, d.id)
        result.rows.append(evaluate(matching, truth, d, method=metric.value))
        result.records.extend(
            ExperimentRecord(
                dataset_id=d.id,
                method=metric.value,
                model=BASELINE_MODEL,
                run_index=run_index,
                matching=matching,
            )
            for run_index in range(1, runs + 1)
        )
        logger.debug("[%s] %s theta=%.4f", d.id, metric.value, theta)

    return result


def compare_metrics(
    benchmark: Benchmark,
    metrics: Optional[Iterable[Union[str, Metric]]] = None,
) -> Dict[Metric, PrCurve]:
    """Precision-recall curve per metric over the scores of all datasets pooled."""
    metrics = [Metric.parse(m) for m in (metrics or list(Metric))]
    truth = [(d.id, s, t) for d in benchmark.datasets for s, t in sorted(benchmark.truth(d.id).pairs)]
    curves = {}
    for metric in metrics:
        curves[metric] = pr_curve(score_benchmark(metric, benchmark), truth)
        logger.info("%s: AUC %.4f", metric.value, curves[metric].auc)
    return curves
