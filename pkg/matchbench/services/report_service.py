"""
matchbench - Report Service
Turns metric structures into tables: benchmark overview, median F1 with
(precision, recall), decisiveness, consistency, the three combination
tables with a per-dataset effort drill-down, and precision-recall curves.
"""

from collections import Counter
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import pandas as pd

from ..core.similarity import Metric, PrCurve
from ..models.benchmark import summarize
from ..models.schemas import Benchmark
from ..utils.storage import ReportStorage
from .baseline_service import BaselineResult
from .evaluation_service import (
    CombinationTables,
    ConsistencyRow,
    MedianTable,
    MetricRow,
    consistency,
    decisiveness_table,
    median_table,
)


def _triple(f1: float, precision: float, recall: float) -> str:
    return f"{f1:.3f} ({precision:.2f}, {recall:.2f})"


# ============================================
# Frames
# ============================================

def benchmark_frame(b: Benchmark) -> pd.DataFrame:
    frame = pd.DataFrame([s.to_dict() for s in summarize(b)])
    total = {
        "dataset": "Total", "source": "", "source_size": "", "target": "", "target_size": "",
        "pairs": int(frame["pairs"].sum()), "matches": int(frame["matches"].sum()),
    }
    return pd.concat([frame, pd.DataFrame([total])], ignore_index=True)


def baseline_frame(result: BaselineResult) -> pd.DataFrame:
    rows = []
    for row in result.rows:
        threshold = result.thresholds.get(row.dataset_id)
        rows.append({
            "dataset": row.dataset_id,
            "metric": result.metric.value,
            "theta": threshold.theta if threshold else float("nan"),
            "f1": row.f1,
            "precision": row.precision,
            "recall": row.recall,
            "tp": row.tp,
            "candidates": row.candidates,
        })
    return pd.DataFrame(rows)


def median_frames(table: MedianTable) -> Dict[str, pd.DataFrame]:
    """Long numeric frame plus the wide 'f1 (p, r)' display frame."""
    long_rows = [
        {"dataset": dataset_id, "method": method, "f1": c.f1, "precision": c.precision,
         "recall": c.recall, "decisiveness": c.decisiveness, "runs": c.runs}
        for (dataset_id, method), c in table.cells.items()
    ]
    long_rows += [
        {"dataset": "mean", "method": method, "f1": c.f1, "precision": c.precision,
         "recall": c.recall, "decisiveness": c.decisiveness, "runs": c.runs}
        for method, c in table.mean.items()
    ]

    wide = []
    for dataset_id in table.datasets + ["mean"]:
        line = {"dataset": dataset_id}
        for method in table.methods:
            c = table.mean[method] if dataset_id == "mean" else table.cells.get((dataset_id, method))
            line[method] = _triple(c.f1, c.precision, c.recall) if c else ""
        wide.append(line)
    return {"long": pd.DataFrame(long_rows), "wide": pd.DataFrame(wide)}


def decisiveness_frame(rows: Sequence[MetricRow]) -> pd.DataFrame:
    table = decisiveness_table(rows)
    frame = pd.DataFrame(table)
    frame.index.name = "dataset"
    return frame.reset_index()


def consistency_frame(rows: Sequence[ConsistencyRow]) -> pd.DataFrame:
    return pd.DataFrame([
        {"method": r.method, "sd_f1": r.sd_f1, "sd_precision": r.sd_precision,
         "sd_recall": r.sd_recall, "datasets": r.datasets}
        for r in rows
    ])


def combination_frames(tables: CombinationTables) -> Dict[str, pd.DataFrame]:
    """Square matrices over methods: tp totals, candidate totals, mean f1 (p, r)."""
    tp, effort, f1, f1_display, drill = [], [], [], [], []
    for a in tables.methods:
        tp_line, effort_line, f1_line, f1_text = {"method": a}, {"method": a}, {"method": a}, {"method": a}
        for b in tables.methods:
            row = tables.row(a, b)
            tp_line[b] = row.tp_total
            effort_line[b] = row.candidates_total
            f1_line[b] = row.mean("f1")
            f1_text[b] = _triple(row.mean("f1"), row.mean("precision"), row.mean("recall"))
        tp.append(tp_line)
        effort.append(effort_line)
        f1.append(f1_line)
        f1_display.append(f1_text)

    for (a, b), row in tables.rows.items():
        for dataset_id, cell in row.per_dataset.items():
            drill.append({
                "method_a": a, "method_b": b, "dataset": dataset_id,
                "tp": cell.tp, "candidates": cell.candidates, "precision": cell.precision,
                "recall": cell.recall, "f1": cell.f1, "run_pairs": cell.run_pairs,
            })
    return {
        "tp": pd.DataFrame(tp),
        "effort": pd.DataFrame(effort),
        "f1": pd.DataFrame(f1),
        "f1_display": pd.DataFrame(f1_display),
        "per_dataset": pd.DataFrame(drill),
    }


def pr_frame(curve: PrCurve) -> pd.DataFrame:
    return pd.DataFrame(curve.rows(), columns=["threshold", "precision", "recall"])


def auc_frame(curves: Dict[Metric, PrCurve]) -> pd.DataFrame:
    return pd.DataFrame([{"metric": m.value, "auc": c.auc} for m, c in curves.items()])


# ============================================
# Writers
# ============================================

def write_benchmark_report(b: Benchmark, out_dir: Union[str, Path]) -> List[Path]:
    return ReportStorage(out_dir).write_table("benchmark", benchmark_frame(b), title="Benchmark overview")


def write_baseline_report(
    result: BaselineResult, out_dir: Union[str, Path], name: Optional[str] = None,
) -> List[Path]:
    return ReportStorage(out_dir).write_table(
        name or f"baseline_{result.metric.value}", baseline_frame(result),
        title=f"Baseline {result.metric.value} at the best-F1 threshold per dataset",
    )


def write_pr_report(curves: Dict[Metric, PrCurve], out_dir: Union[str, Path]) -> List[Path]:
    storage = ReportStorage(out_dir)
    paths = [storage.write_csv(f"pr_{m.value}", pr_frame(c)) for m, c in curves.items()]
    paths += storage.write_table("pr_auc", auc_frame(curves), title="Area under the precision-recall curve")
    return paths


def write_evaluation_report(rows: Sequence[MetricRow], out_dir: Union[str, Path]) -> List[Path]:
    """Per-run metrics, medians, decisiveness and (with two or more runs) consistency."""
    storage = ReportStorage(out_dir)
    paths = [storage.write_csv("metrics", pd.DataFrame([r.to_dict() for r in rows]))]

    medians = median_frames(median_table(rows))
    paths += storage.write_table(
        "median_f1", medians["long"], display=medians["wide"], title="Median F1 (precision, recall)",
    )
    paths += storage.write_table("decisiveness", decisiveness_frame(rows), title="Median decisiveness")

    runs_per_cell = Counter((r.dataset_id, r.method) for r in rows)
    if runs_per_cell and min(runs_per_cell.values()) >= 2:
        paths += storage.write_table(
            "consistency", consistency_frame(consistency(rows)),
            title="Standard deviation over runs, averaged over datasets",
        )
    return paths


def write_combination_report(tables: CombinationTables, out_dir: Union[str, Path], prefix: str = "") -> List[Path]:
    storage = ReportStorage(out_dir)
    frames = combination_frames(tables)
    stem = f"{prefix}_" if prefix else ""
    paths = storage.write_table(f"{stem}combined_tp", frames["tp"], title="True matches found (sum over datasets)")
    paths += storage.write_table(
        f"{stem}combined_effort", frames["effort"], title="Candidates to verify (sum over datasets)",
    )
    paths += storage.write_table(
        f"{stem}combined_f1", frames["f1"], display=frames["f1_display"],
        title="Combined F1 (precision, recall), mean over datasets",
    )
    paths.append(storage.write_csv(f"{stem}combined_per_dataset", frames["per_dataset"]))
    return paths
