"""
matchbench - Evaluation Service
Precision, recall, F1 and decisiveness per run; median and consistency
tables; union combination of methods over all run pairs.
"""

from collections import defaultdict
from dataclasses import asdict, dataclass, field
from itertools import product
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import DatasetMismatch, InsufficientRuns, RunCountMismatch
from ..models.benchmark import pair_space
from ..models.results import ExperimentRecord, Matching
from ..models.schemas import Benchmark, Dataset, GroundTruth
from ..utils.logging_utils import get_logger

logger = get_logger("eval")


# ============================================
# Data Classes
# ============================================

@dataclass(frozen=True)
class MetricRow:
    dataset_id: str
    method: str
    precision: float
    recall: float
    f1: float
    decisiveness: float
    tp: int
    fp: int
    fn: int
    candidates: int
    run_index: int = 1
    # False when P+ is empty and precision was set to 0
    precision_defined: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class MedianCell:
    f1: float
    precision: float
    recall: float
    decisiveness: float
    runs: int


@dataclass
class MedianTable:
    """Median over runs per (dataset, method), plus the mean of medians per method."""
    datasets: List[str] = field(default_factory=list)
    methods: List[str] = field(default_factory=list)
    cells: Dict[Tuple[str, str], MedianCell] = field(default_factory=dict)
    mean: Dict[str, MedianCell] = field(default_factory=dict)


@dataclass(frozen=True)
class ConsistencyRow:
    method: str
    sd_f1: float
    sd_precision: float
    sd_recall: float
    datasets: int


@dataclass(frozen=True)
class CombinationCell:
    """Averages over all run pairs of one method pair on one dataset."""
    tp: float
    candidates: float
    precision: float
    recall: float
    f1: float
    run_pairs: int


@dataclass
class CombinationRow:
    method_pair: Tuple[str, str]
    per_dataset: Dict[str, CombinationCell] = field(default_factory=dict)

    @property
    def tp_total(self) -> float:
        return float(sum(c.tp for c in self.per_dataset.values()))

    @property
    def candidates_total(self) -> float:
        return float(sum(c.candidates for c in self.per_dataset.values()))

    def mean(self, attribute: str) -> float:
        return float(np.mean([getattr(c, attribute) for c in self.per_dataset.values()]))


@dataclass
class CombinationTables:
    methods: List[str]
    datasets: List[str]
    rows: Dict[Tuple[str, str], CombinationRow] = field(default_factory=dict)

    def row(self, a: str, b: str) -> CombinationRow:
        return self.rows[(a, b)] if (a, b) in self.rows else self.rows[(b, a)]


# ============================================
# Single Matching
# ============================================

def evaluate(
    m: Matching,
    t: GroundTruth,
    d: Dataset,
    method: str = "",
    run_index: int = 1,
) -> MetricRow:
    """Metrics of one matching against the ground truth of its dataset."""
    if m.dataset_id != d.id or t.dataset_id != d.id:
        raise DatasetMismatch(
            f"matching {m.dataset_id!r}, truth {t.dataset_id!r} and dataset {d.id!r} differ"
        )
    space = set(pair_space(d))
    stray = m.decided() - space
    if stray:
        raise DatasetMismatch(f"matching for {d.id} names pairs outside its pair space: {sorted(stray)[:3]}")

    truth = t.pairs
    candidates = len(m.yes_set)
    tp = len(m.yes_set & truth)
    fp = candidates - tp
    fn = len(truth) - tp

    precision = tp / candidates if candidates else 0.0
    recall = tp / len(truth) if truth else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    decisiveness = len(m.decided()) / len(space) if space else 0.0

    return MetricRow(
        dataset_id=d.id,
        method=method,
        precision=precision,
        recall=recall,
        f1=f1,
        decisiveness=decisiveness,
        tp=tp,
        fp=fp,
        fn=fn,
        candidates=candidates,
        run_index=run_index,
        precision_defined=candidates > 0,
    )


def evaluate_records(records: Iterable[ExperimentRecord], benchmark: Benchmark) -> List[MetricRow]:
    """MetricRow per record; the method is the record label."""
    rows = []
    for r in records:
        try:
            d = benchmark.dataset(r.dataset_id)
        except KeyError:
            raise DatasetMismatch(f"record for unknown dataset {r.dataset_id}") from None
        rows.append(evaluate(r.matching, benchmark.truth(d.id), d, method=r.label, run_index=r.run_index))
    return rows


# ============================================
# Aggregation
# ============================================

def _group(rows: Iterable[MetricRow]) -> Dict[Tuple[str, str], List[MetricRow]]:
    groups: Dict[Tuple[str, str], List[MetricRow]] = defaultdict(list)
    for row in rows:
        groups[(row.dataset_id, row.method)].append(row)
    return groups


def _ordered(values: Iterable[str]) -> List[str]:
    return list(dict.fromkeys(values))


def median_table(rows: Iterable[MetricRow]) -> MedianTable:
    """
    Median over runs of f1, precision, recall and decisiveness, each taken
    independently. The mean row averages the medians over datasets.
    """
    rows = list(rows)
    table = MedianTable(
        datasets=_ordered(r.dataset_id for r in rows),
        methods=_ordered(r.method for r in rows),
    )
    for (dataset_id, method), group in _group(rows).items():
        table.cells[(dataset_id, method)] = MedianCell(
            f1=float(np.median([r.f1 for r in group])),
            precision=float(np.median([r.precision for r in group])),
            recall=float(np.median([r.recall for r in group])),
            decisiveness=float(np.median([r.decisiveness for r in group])),
            runs=len(group),
        )
    for method in table.methods:
        cells = [c for (_, m), c in table.cells.items() if m == method]
        table.mean[method] = MedianCell(
            f1=float(np.mean([c.f1 for c in cells])),
            precision=float(np.mean([c.precision for c in cells])),
            recall=float(np.mean([c.recall for c in cells])),
            decisiveness=float(np.mean([c.decisiveness for c in cells])),
            runs=sum(c.runs for c in cells),
        )
    return table


def decisiveness_table(rows: Iterable[MetricRow]) -> Dict[str, Dict[str, float]]:
    """{method: {dataset: median decisiveness, ..., "mean": mean of medians}}."""
    table = median_table(rows)
    result: Dict[str, Dict[str, float]] = {}
    for method in table.methods:
        column = {
            dataset_id: table.cells[(dataset_id, method)].decisiveness
            for dataset_id in table.datasets
            if (dataset_id, method) in table.cells
        }
        column["mean"] = table.mean[method].decisiveness
        result[method] = column
    return result


def consistency(rows: Iterable[MetricRow]) -> List[ConsistencyRow]:
    """Sample standard deviation over runs per dataset, averaged over datasets, per method."""
    by_method: Dict[str, List[List[MetricRow]]] = defaultdict(list)
    for (dataset_id, method), group in _group(rows).items():
        if len(group) < 2:
            raise InsufficientRuns(
                f"{method} has {len(group)} run(s) on {dataset_id}; consistency needs at least 2"
            )
        by_method[method].append(group)

    result = []
    for method, groups in by_method.items():
        def mean_sd(attribute: str) -> float:
            return float(np.mean([np.std([getattr(r, attribute) for r in g], ddof=1) for g in groups]))

        result.append(ConsistencyRow(
            method=method,
            sd_f1=mean_sd("f1"),
            sd_precision=mean_sd("precision"),
            sd_recall=mean_sd("recall"),
            datasets=len(groups),
        ))
    return result


# ============================================
# Combination
# ============================================

def _matching(item: Union[ExperimentRecord, Matching]) -> Matching:
    return item.matching if isinstance(item, ExperimentRecord) else item


def combine(e1: Union[ExperimentRecord, Matching], e2: Union[ExperimentRecord, Matching]) -> Matching:
    """Union of the yes-sets; a pair either side said yes to never lands in P-."""
    m1, m2 = _matching(e1), _matching(e2)
    if m1.dataset_id != m2.dataset_id:
        raise DatasetMismatch(f"cannot combine {m1.dataset_id!r} with {m2.dataset_id!r}")
    yes = m1.yes_set | m2.yes_set
    no = (m1.no_set | m2.no_set) - yes
    return Matching(dataset_id=m1.dataset_id, yes_set=yes, no_set=no)


def _cell(matchings: Sequence[Matching], t: GroundTruth, d: Dataset) -> CombinationCell:
    rows = [evaluate(m, t, d) for m in matchings]
    return CombinationCell(
        tp=float(np.mean([r.tp for r in rows])),
        candidates=float(np.mean([r.candidates for r in rows])),
        precision=float(np.mean([r.precision for r in rows])),
        recall=float(np.mean([r.recall for r in rows])),
        f1=float(np.mean([r.f1 for r in rows])),
        run_pairs=len(rows),
    )


def combination_tables(
    records: Iterable[ExperimentRecord],
    benchmark: Benchmark,
    methods: Optional[Sequence[str]] = None,
) -> CombinationTables:
    """
    For every unordered method pair and dataset, average tp, candidate count,
    precision, recall and f1 over all run pairs of the combined matchings.
    The diagonal holds single-method averages over the method's runs.
    """
    runs: Dict[Tuple[str, str], List[ExperimentRecord]] = defaultdict(list)
    for r in records:
        runs[(r.label, r.dataset_id)].append(r)

    methods = list(methods) if methods else _ordered(label for label, _ in runs)
    datasets = [d.id for d in benchmark.datasets if any((m, d.id) in runs for m in methods)]

    for dataset_id in datasets:
        counts = {m: len(runs.get((m, dataset_id), [])) for m in methods}
        if len(set(counts.values())) != 1 or 0 in counts.values():
            raise RunCountMismatch(f"run counts differ on {dataset_id}: {counts}")

    tables = CombinationTables(methods=methods, datasets=datasets)
    for i, a in enumerate(methods):
        for b in methods[i:]:
            row = CombinationRow(method_pair=(a, b))
            for dataset_id in datasets:
                d = benchmark.dataset(dataset_id)
                left = sorted(runs[(a, dataset_id)], key=lambda r: r.run_index)
                right = sorted(runs[(b, dataset_id)], key=lambda r: r.run_index)
                if a == b:
                    matchings = [r.matching for r in left]
                else:
                    matchings = [combine(x, y) for x, y in product(left, right)]
                row.per_dataset[dataset_id] = _cell(matchings, benchmark.truth(dataset_id), d)
            tables.rows[(a, b)] = row
    logger.debug("Combined %d methods over %d datasets", len(methods), len(datasets))
    return tables
