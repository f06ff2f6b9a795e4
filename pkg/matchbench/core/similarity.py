"""
matchbench - String Similarity Baseline
Name-based matchers (padded trigram Dice, Jaro-Winkler, Levenshtein,
Monge-Elkan), best-F1 threshold selection and precision/recall curves.
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Collection, Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple, Union

from rapidfuzz.distance import JaroWinkler, Levenshtein
from scipy.integrate import trapezoid

from ..config.constants import JARO_WINKLER_PREFIX_WEIGHT, NGRAM_PAD_END, NGRAM_PAD_START
from ..models.benchmark import pair_space
from ..models.results import Matching
from ..models.schemas import Benchmark, Dataset, GroundTruth, Pair
from .errors import DegenerateInput, EmptyTruth, UnknownMetric

# (dataset_id, source attribute, target attribute)
PairKey = Tuple[str, str, str]

_TOKEN_SPLIT = re.compile(r"[\W_]+", re.UNICODE)


class Metric(str, Enum):
    NGRAM = "ngram"
    JARO_WINKLER = "jaro_winkler"
    LEVENSHTEIN = "levenshtein"
    MONGE_ELKAN = "monge_elkan"

    @classmethod
    def parse(cls, value: Union[str, "Metric"]) -> "Metric":
        if isinstance(value, Metric):
            return value
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"n_gram": "ngram", "trigram": "ngram", "sim_ng": "ngram", "jarowinkler": "jaro_winkler"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise UnknownMetric(f"Unknown similarity metric: {value}") from None


# ============================================
# Data Classes
# ============================================

@dataclass(frozen=True)
class SimilarityScore:
    """Similarity of one attribute pair under one metric."""
    dataset_id: str
    pair: Pair
    value: float
    metric: Metric

    @property
    def key(self) -> PairKey:
        return (self.dataset_id, self.pair[0], self.pair[1])


@dataclass(frozen=True)
class ThresholdedMatcher:
    """Predicts a match for every pair whose score reaches theta."""
    metric: Metric
    theta: float

    def yes_set(self, scores: Iterable[SimilarityScore]) -> Set[Pair]:
        return {s.pair for s in scores if s.value >= self.theta}


@dataclass(frozen=True)
class ThresholdResult:
    theta: float
    f1: float
    precision: float
    recall: float
    tp: int
    candidates: int


@dataclass
class PrCurve:
    """(recall, precision) per distinct threshold, highest threshold first."""
    thresholds: List[float] = field(default_factory=list)
    points: List[Tuple[float, float]] = field(default_factory=list)
    auc: float = 0.0

    def rows(self) -> List[Dict[str, float]]:
        return [
            {"threshold": t, "precision": p, "recall": r}
            for t, (r, p) in zip(self.thresholds, self.points)
        ]


# ============================================
# Primitives
# ============================================

def trigrams(name: str) -> Set[str]:
    """Set of 3-grams of the name padded with '##' and '%%'."""
    padded = f"{NGRAM_PAD_START}{name}{NGRAM_PAD_END}"
    return {padded[i:i + 3] for i in range(len(padded) - 2)}


def dice(a: Collection[str], b: Collection[str]) -> float:
    """Dice coefficient 2|A∩B| / (|A|+|B|)."""
    a, b = set(a), set(b)
    if not a and not b:
        raise DegenerateInput("Dice similarity of two empty sets is undefined")
    return 2 * len(a & b) / (len(a) + len(b))


def _tokens(name: str) -> List[str]:
    tokens = [t for t in _TOKEN_SPLIT.split(name) if t]
    return tokens or [name]


def _monge_elkan_directed(left: List[str], right: List[str]) -> float:
    return sum(
        max(JaroWinkler.similarity(l, r, prefix_weight=JARO_WINKLER_PREFIX_WEIGHT) for r in right)
        for l in left
    ) / len(left)


def sim(metric: Union[str, Metric], a: str, b: str) -> float:
    """Similarity of two attribute names in [0, 1]; names are case-folded."""
    metric = Metric.parse(metric)
    a, b = a.casefold(), b.casefold()

    if metric is Metric.NGRAM:
        return dice(trigrams(a), trigrams(b))
    if metric is Metric.JARO_WINKLER:
        return JaroWinkler.similarity(a, b, prefix_weight=JARO_WINKLER_PREFIX_WEIGHT)
    if metric is Metric.LEVENSHTEIN:
        if not a and not b:
            return 1.0
        return 1.0 - Levenshtein.distance(a, b) / max(len(a), len(b))
    # Monge-Elkan, symmetrised
    ta, tb = _tokens(a), _tokens(b)
    return (_monge_elkan_directed(ta, tb) + _monge_elkan_directed(tb, ta)) / 2


# ============================================
# Dataset Scoring
# ============================================

def score_dataset(metric: Union[str, Metric], d: Dataset) -> List[SimilarityScore]:
    """One score per pair of the dataset, in pair-space order."""
    metric = Metric.parse(metric)
    return [
        SimilarityScore(dataset_id=d.id, pair=(s, t), value=sim(metric, s, t), metric=metric)
        for s, t in pair_space(d)
    ]


def score_benchmark(metric: Union[str, Metric], b: Benchmark) -> List[SimilarityScore]:
    """Scores of every dataset, pooled into one list."""
    scores: List[SimilarityScore] = []
    for d in b.datasets:
        scores.extend(score_dataset(metric, d))
    return scores


def _truth_keys(
    scores: Sequence[SimilarityScore],
    truth: Union[GroundTruth, Iterable[PairKey], Iterable[Pair]],
) -> FrozenSet[PairKey]:
    if isinstance(truth, GroundTruth):
        return frozenset((truth.dataset_id, s, t) for s, t in truth.pairs)
    items = list(truth)
    if items and len(items[0]) == 2:
        dataset_id = scores[0].dataset_id if scores else ""
        return frozenset((dataset_id, s, t) for s, t in items)
    return frozenset(items)


def _f1(tp: int, candidates: int, positives: int) -> float:
    # 2tp / (2tp + fp + fn), equal to the harmonic mean of precision and recall
    denominator = candidates + positives
    return 2 * tp / denominator if denominator else 0.0


def _sweep(
    scores: Sequence[SimilarityScore], truth_keys: FrozenSet[PairKey]
) -> List[Tuple[float, int, int]]:
    """(threshold, tp, candidates) for every distinct score, highest first."""
    ordered = sorted(scores, key=lambda s: -s.value)
    sweep = []
    tp = candidates = 0
    i = 0
    while i < len(ordered):
        value = ordered[i].value
        while i < len(ordered) and ordered[i].value == value:
            candidates += 1
            tp += ordered[i].key in truth_keys
            i += 1
        sweep.append((value, tp, candidates))
    return sweep


def best_threshold(
    scores: Sequence[SimilarityScore],
    truth: Union[GroundTruth, Iterable[PairKey], Iterable[Pair]],
) -> ThresholdResult:
    """Observed score with the best F1 for {value >= theta}; ties go to the smallest theta."""
    truth_keys = _truth_keys(scores, truth)
    if not truth_keys:
        raise EmptyTruth("Threshold selection needs at least one true match")

    positives = len(truth_keys)
    best = None
    for theta, tp, candidates in _sweep(scores, truth_keys):
        f1 = _f1(tp, candidates, positives)
        # sweep runs from high to low theta, so >= keeps the smallest theta on ties
        if best is None or f1 >= best.f1:
            best = ThresholdResult(
                theta=theta,
                f1=f1,
                precision=tp / candidates,
                recall=tp / positives,
                tp=tp,
                candidates=candidates,
            )
    if best is None:
        raise EmptyTruth("No scores to choose a threshold from")
    return best


def pr_curve(
    scores: Sequence[SimilarityScore],
    truth: Union[GroundTruth, Iterable[PairKey], Iterable[Pair]],
) -> PrCurve:
    """Precision/recall at every distinct threshold plus trapezoidal AUC over recall."""
    truth_keys = _truth_keys(scores, truth)
    if not truth_keys:
        raise EmptyTruth("A precision-recall curve needs at least one true match")

    positives = len(truth_keys)
    curve = PrCurve()
    for theta, tp, candidates in _sweep(scores, truth_keys):
        curve.thresholds.append(theta)
        curve.points.append((tp / positives, tp / candidates))

    if curve.points:
        recalls = [0.0] + [r for r, _ in curve.points]
        precisions = [curve.points[0][1]] + [p for _, p in curve.points]
        curve.auc = float(trapezoid(precisions, recalls))
    return curve


def baseline_matching(scores: Sequence[SimilarityScore], theta: float, dataset_id: str) -> Matching:
    """Matching of a thresholded matcher: yes for score >= theta, no for every other pair."""
    yes = frozenset(s.pair for s in scores if s.value >= theta)
    no = frozenset(s.pair for s in scores) - yes
    return Matching(dataset_id=dataset_id, yes_set=yes, no_set=no)
