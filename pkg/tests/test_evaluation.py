"""
Metrics per matching, median and consistency tables, and method combination.
"""

import itertools
import random

import pytest

from matchbench.core.errors import DatasetMismatch, EvaluationError, InsufficientRuns, RunCountMismatch
from matchbench.models import Benchmark, ExperimentRecord, Matching, pair_space
from matchbench.services.baseline_service import run_baseline
from matchbench.services.evaluation_service import (
    MetricRow,
    combination_tables,
    combine,
    consistency,
    decisiveness_table,
    evaluate,
    median_table,
)

from conftest import make_dataset, make_truth

D = make_dataset("d", 4, 4)
TRUTH = make_truth("d", [("a1", "b1"), ("a2", "b2")])


def _matching(yes=(), no=(), dataset_id="d"):
    return Matching(dataset_id=dataset_id, yes_set=frozenset(yes), no_set=frozenset(no))


def _row(f1, precision=0.5, recall=0.5, dataset_id="d", method="m", run_index=1):
    return MetricRow(
        dataset_id=dataset_id, method=method, precision=precision, recall=recall, f1=f1,
        decisiveness=1.0, tp=0, fp=0, fn=0, candidates=0, run_index=run_index,
    )


# ============================================
# Single matching
# ============================================

def test_precision_recall_f1_example():
    yes = [("a1", "b1"), ("a1", "b2"), ("a1", "b3"), ("a1", "b4"), ("a2", "b1")]
    row = evaluate(_matching(yes), TRUTH, D)
    assert (row.tp, row.fp, row.fn, row.candidates) == (1, 4, 1, 5)
    assert row.precision == pytest.approx(0.2)
    assert row.recall == pytest.approx(0.5)
    assert row.f1 == pytest.approx(0.286, abs=5e-4)


def test_perfect_matching():
    row = evaluate(_matching(TRUTH.pairs, set(pair_space(D)) - TRUTH.pairs), TRUTH, D)
    assert (row.precision, row.recall, row.f1, row.decisiveness) == (1.0, 1.0, 1.0, 1.0)


def test_decisiveness_example():
    d = make_dataset("d80", 5, 16)
    pairs = pair_space(d)
    row = evaluate(_matching(pairs[:16], pairs[16:28], "d80"), make_truth("d80", []), d)
    assert row.decisiveness == pytest.approx(0.35)


def test_empty_yes_set():
    row = evaluate(_matching(no=[("a1", "b1")]), TRUTH, D)
    assert row.precision == 0.0
    assert row.f1 == 0.0
    assert not row.precision_defined
    assert row.decisiveness == pytest.approx(1 / 16)


def test_overlapping_yes_and_no_sets():
    with pytest.raises(EvaluationError):
        _matching(yes=[("a1", "b1")], no=[("a1", "b1")])


def test_dataset_mismatch():
    with pytest.raises(DatasetMismatch):
        evaluate(_matching(dataset_id="other"), TRUTH, D)
    with pytest.raises(DatasetMismatch):
        evaluate(_matching(yes=[("a1", "zz")]), TRUTH, D)


def test_counts_are_consistent():
    rng = random.Random(4)
    pairs = pair_space(D)
    for _ in range(50):
        yes = set(rng.sample(pairs, rng.randint(0, 8)))
        row = evaluate(_matching(yes), TRUTH, D)
        assert row.tp + row.fp == row.candidates == len(yes)
        assert row.tp + row.fn == len(TRUTH.pairs)


# ============================================
# Medians & consistency
# ============================================

def test_median_of_odd_and_even_runs():
    rows = [_row(f1, run_index=i) for i, f1 in enumerate([0.2, 0.4, 0.3, 0.5, 0.4], start=1)]
    rows += [_row(f1, dataset_id="e", run_index=i) for i, f1 in enumerate([0.2, 0.4], start=1)]
    table = median_table(rows)
    assert table.cells[("d", "m")].f1 == pytest.approx(0.4)
    assert table.cells[("e", "m")].f1 == pytest.approx(0.3)
    assert table.cells[("d", "m")].runs == 5
    assert table.mean["m"].f1 == pytest.approx(0.35)


def test_medians_are_taken_per_metric():
    rows = [
        _row(0.1, precision=0.9, recall=0.1, run_index=1),
        _row(0.5, precision=0.1, recall=0.9, run_index=2),
        _row(0.3, precision=0.5, recall=0.5, run_index=3),
    ]
    cell = median_table(rows).cells[("d", "m")]
    assert (cell.f1, cell.precision, cell.recall) == (0.3, 0.5, 0.5)


def test_decisiveness_table_layout():
    table = decisiveness_table([_row(0.1), _row(0.2, dataset_id="e")])
    assert table == {"m": {"d": 1.0, "e": 1.0, "mean": 1.0}}


def test_consistency():
    rows = [_row(f1, run_index=i) for i, f1 in enumerate([0.4, 0.4, 0.5, 0.3, 0.4], start=1)]
    rows += [_row(f1, dataset_id="e", run_index=i) for i, f1 in enumerate([0.0, 1.0], start=1)]
    rows += [_row(0.6, method="steady", run_index=i) for i in (1, 2, 3)]
    result = {r.method: r for r in consistency(rows)}

    assert result["m"].sd_f1 == pytest.approx((0.070711 + 0.707107) / 2, abs=1e-5)
    assert result["m"].datasets == 2
    assert result["steady"].sd_f1 == pytest.approx(0.0, abs=1e-12)


def test_consistency_needs_two_runs():
    with pytest.raises(InsufficientRuns):
        consistency([_row(0.5)])


# ============================================
# Combination
# ============================================

def test_combine_example():
    p1, p2, p3 = ("a1", "b1"), ("a1", "b2"), ("a2", "b2")
    truth = make_truth("d", [p1, p3])
    union = combine(_matching([p1, p2]), _matching([p2, p3]))
    row = evaluate(union, truth, D)
    assert row.tp == 2
    assert row.recall == 1.0
    assert row.precision == pytest.approx(2 / 3)


def test_combine_no_set_excludes_any_yes():
    p1, p2 = ("a1", "b1"), ("a1", "b2")
    union = combine(_matching(yes=[p1], no=[p2]), _matching(yes=[p2], no=[p1]))
    assert union.yes_set == {p1, p2}
    assert union.no_set == frozenset()


def test_combine_with_itself_and_with_nothing():
    m = _matching([("a1", "b1")], [("a2", "b2")])
    assert combine(m, m) == m
    assert combine(m, _matching()) == m


def test_combine_different_datasets():
    with pytest.raises(DatasetMismatch):
        combine(_matching(), _matching(dataset_id="other"))


def _random_matching(rng, pairs):
    shuffled = rng.sample(pairs, len(pairs))
    k, j = rng.randint(0, 6), rng.randint(0, 6)
    return _matching(shuffled[:k], shuffled[k:k + j])


def test_union_bounds():
    rng = random.Random(7)
    pairs = pair_space(D)
    for _ in range(100):
        m1, m2 = _random_matching(rng, pairs), _random_matching(rng, pairs)
        r1, r2 = evaluate(m1, TRUTH, D), evaluate(m2, TRUTH, D)
        ru = evaluate(combine(m1, m2), TRUTH, D)
        assert ru.recall >= max(r1.recall, r2.recall)
        assert ru.tp >= max(r1.tp, r2.tp)
        assert max(r1.candidates, r2.candidates) <= ru.candidates <= r1.candidates + r2.candidates


def _records(method, matchings, model="m"):
    return [
        ExperimentRecord(dataset_id="d", method=method, model=model, run_index=i, matching=m)
        for i, m in enumerate(matchings, start=1)
    ]


def test_combination_tables_match_brute_force():
    rng = random.Random(13)
    pairs = pair_space(D)
    runs = {name: [_random_matching(rng, pairs) for _ in range(5)] for name in ("x", "y")}
    b = Benchmark(datasets=(D,), truths=(TRUTH,))
    tables = combination_tables(_records("x", runs["x"]) + _records("y", runs["y"]), b)

    assert tables.methods == ["m:x", "m:y"]
    cell = tables.row("m:y", "m:x").per_dataset["d"]
    assert cell.run_pairs == 25

    combined = [evaluate(combine(a, c), TRUTH, D) for a, c in itertools.product(runs["x"], runs["y"])]
    assert cell.tp == pytest.approx(sum(r.tp for r in combined) / 25, abs=1e-12)
    assert cell.candidates == pytest.approx(sum(r.candidates for r in combined) / 25, abs=1e-12)
    assert cell.f1 == pytest.approx(sum(r.f1 for r in combined) / 25, abs=1e-12)

    single = [evaluate(m, TRUTH, D) for m in runs["x"]]
    diagonal = tables.row("m:x", "m:x").per_dataset["d"]
    assert diagonal.run_pairs == 5
    assert diagonal.f1 == pytest.approx(sum(r.f1 for r in single) / 5, abs=1e-12)


def test_combination_requires_equal_run_counts():
    rng = random.Random(1)
    pairs = pair_space(D)
    b = Benchmark(datasets=(D,), truths=(TRUTH,))
    records = _records("x", [_random_matching(rng, pairs) for _ in range(5)])
    records += _records("y", [_random_matching(rng, pairs) for _ in range(4)])
    with pytest.raises(RunCountMismatch):
        combination_tables(records, b)


def test_baseline_with_itself_equals_baseline(mini):
    baseline = run_baseline(mini, "ngram", runs=5)
    tables = combination_tables(baseline.records, mini)
    assert tables.methods == ["ngram"]
    row = tables.row("ngram", "ngram")
    for single in baseline.rows:
        assert row.per_dataset[single.dataset_id].f1 == pytest.approx(single.f1)
    assert row.tp_total == sum(r.tp for r in baseline.rows)
