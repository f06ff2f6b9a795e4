"""
matchbench - Benchmark Manifests
Load, validate, summarise, serialise and import matching benchmarks.

Manifest layout: a directory holding ``benchmark.json`` (or the file itself)
with ``datasets`` (inline objects or relative file names) and ``truth``.
"""

import csv
import json
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError

from ..config.constants import MANIFEST_FILENAME
from ..core.errors import ManifestNotFound, SchemaError, TruthError
from ..utils.logging_utils import get_logger
from .schemas import Benchmark, Dataset, GroundTruth, Pair, Schema

logger = get_logger("benchmark")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class Diagnostic:
    """One invariant violation found by validate_benchmark."""
    severity: str  # "error" or "warning"
    kind: str      # "schema" or "truth"
    code: str
    message: str
    dataset_id: Optional[str] = None

    def __str__(self) -> str:
        where = f"[{self.dataset_id}] " if self.dataset_id else ""
        return f"{self.severity}: {where}{self.message} ({self.code})"


@dataclass(frozen=True)
class DatasetSummary:
    """One row of the benchmark overview table."""
    dataset: str
    source: str
    source_size: int
    target: str
    target_size: int
    pairs: int
    matches: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# ============================================
# Reading
# ============================================

def _manifest_file(path: PathLike) -> Path:
    p = Path(path)
    if p.is_dir():
        p = p / MANIFEST_FILENAME
    if not p.is_file():
        raise ManifestNotFound(f"No benchmark manifest at {path}")
    return p


def _read_json(path: Path) -> Any:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ManifestNotFound(f"Referenced manifest file missing: {path}") from e
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError(f"{path.name} is not valid UTF-8 JSON: {e}") from e


def pair_space(d: Dataset) -> List[Pair]:
    """All (source, target) attribute pairs in source-major order."""
    return [(s.name, t.name) for s in d.source.attributes for t in d.target.attributes]


def read_benchmark(path: PathLike) -> Benchmark:
    """Parse a manifest without checking cross-references (see validate_benchmark)."""
    manifest = _manifest_file(path)
    raw = _read_json(manifest)
    if not isinstance(raw, dict) or not isinstance(raw.get("datasets"), list):
        raise SchemaError(f"{manifest.name} must be an object with a 'datasets' list")

    datasets: List[Dataset] = []
    truth_entries: List[Dict[str, Any]] = list(raw.get("truth") or [])

    for entry in raw["datasets"]:
        if isinstance(entry, str):
            entry = _read_json(manifest.parent / entry)
        if not isinstance(entry, dict):
            raise SchemaError(f"Dataset entry must be an object or file name, got {entry!r}")
        if "matches" in entry:
            truth_entries.append({"dataset": entry.get("id"), "matches": entry["matches"]})
        try:
            datasets.append(Dataset.model_validate(
                {k: v for k, v in entry.items() if k != "matches"}
            ))
        except ValidationError as e:
            raise SchemaError(f"Invalid dataset {entry.get('id', '?')}: {e}") from e

    merged: Dict[str, List[Any]] = defaultdict(list)
    order: List[str] = []
    for entry in truth_entries:
        if not isinstance(entry, dict) or "dataset" not in entry:
            raise TruthError(f"Truth entry must name its dataset: {entry!r}")
        if entry["dataset"] not in merged:
            order.append(entry["dataset"])
        merged[entry["dataset"]].extend(entry.get("matches") or [])

    truths: List[GroundTruth] = []
    for dataset_id in order:
        try:
            truths.append(GroundTruth.model_validate(
                {"dataset": dataset_id, "matches": merged[dataset_id]}
            ))
        except ValidationError as e:
            raise TruthError(f"Invalid ground truth for {dataset_id}: {e}") from e

    return Benchmark(datasets=tuple(datasets), truths=tuple(truths))


# ============================================
# Validation
# ============================================

def _schema_diagnostics(d: Dataset, side: str, schema: Schema) -> List[Diagnostic]:
    diagnostics = []
    if not schema.attributes:
        diagnostics.append(Diagnostic(
            "error", "schema", "empty_schema",
            f"{side} table {schema.table_name} has no attributes", d.id,
        ))
    seen = set()
    for attr in schema.attributes:
        if attr.key in seen:
            diagnostics.append(Diagnostic(
                "error", "schema", "duplicate_attribute",
                f"{side} table {schema.table_name} repeats attribute {attr.name}", d.id,
            ))
        seen.add(attr.key)
    return diagnostics


def validate_benchmark(b: Benchmark) -> List[Diagnostic]:
    """Check every benchmark invariant; returns an empty list iff all hold."""
    diagnostics: List[Diagnostic] = []

    ids_seen = set()
    for d in b.datasets:
        if d.id in ids_seen:
            diagnostics.append(Diagnostic(
                "error", "schema", "duplicate_dataset", f"dataset id {d.id} used twice", d.id,
            ))
        ids_seen.add(d.id)
        diagnostics.extend(_schema_diagnostics(d, "source", d.source))
        diagnostics.extend(_schema_diagnostics(d, "target", d.target))

    by_id = {d.id: d for d in b.datasets}
    truth_ids = set()
    for t in b.truths:
        if t.dataset_id in truth_ids:
            diagnostics.append(Diagnostic(
                "error", "truth", "duplicate_truth_entry",
                f"more than one ground truth for {t.dataset_id}", t.dataset_id,
            ))
        truth_ids.add(t.dataset_id)

        d = by_id.get(t.dataset_id)
        if d is None:
            diagnostics.append(Diagnostic(
                "error", "truth", "unknown_dataset",
                f"ground truth for unknown dataset {t.dataset_id}", t.dataset_id,
            ))
            continue

        seen_pairs = set()
        for src, tgt in t.matches:
            if d.source.find(src) is None:
                diagnostics.append(Diagnostic(
                    "error", "truth", "unknown_attribute",
                    f"match ({src}, {tgt}) names unknown source attribute {src}", d.id,
                ))
            if d.target.find(tgt) is None:
                diagnostics.append(Diagnostic(
                    "error", "truth", "unknown_attribute",
                    f"match ({src}, {tgt}) names unknown target attribute {tgt}", d.id,
                ))
            key = (src.casefold(), tgt.casefold())
            if key in seen_pairs:
                diagnostics.append(Diagnostic(
                    "warning", "truth", "duplicate_match",
                    f"match ({src}, {tgt}) listed more than once", d.id,
                ))
            seen_pairs.add(key)

    for d in b.datasets:
        if d.id not in truth_ids:
            diagnostics.append(Diagnostic(
                "error", "truth", "missing_truth", f"no ground truth for {d.id}", d.id,
            ))

    return diagnostics


def _canonical_truth(b: Benchmark) -> Benchmark:
    """Resolve truth names to the schema spelling and drop duplicate pairs."""
    truths = []
    for t in b.truths:
        d = b.dataset(t.dataset_id)
        matches: List[Pair] = []
        for src, tgt in t.matches:
            pair = (d.source.find(src).name, d.target.find(tgt).name)
            if pair not in matches:
                matches.append(pair)
        truths.append(GroundTruth(dataset=t.dataset_id, matches=tuple(matches)))
    return Benchmark(datasets=b.datasets, truths=tuple(truths))


def load_benchmark(path: PathLike) -> Benchmark:
    """Read and fully validate a benchmark manifest."""
    b = read_benchmark(path)
    diagnostics = validate_benchmark(b)

    errors = [d for d in diagnostics if d.severity == "error"]
    for warning in (d for d in diagnostics if d.severity == "warning"):
        logger.warning("%s", warning)
    if errors:
        message = "; ".join(str(e) for e in errors)
        if any(e.kind == "schema" for e in errors):
            raise SchemaError(message)
        raise TruthError(message)

    b = _canonical_truth(b)
    logger.debug(
        "Loaded %d datasets (%d pairs, %d matches) from %s",
        len(b.datasets), sum(d.pair_count for d in b.datasets),
        sum(len(t.matches) for t in b.truths), path,
    )
    return b


# ============================================
# Summary & Serialisation
# ============================================

def summarize(b: Benchmark) -> List[DatasetSummary]:
    """Per-dataset sizes: |source|, |target|, |pairs| and |matches|."""
    return [
        DatasetSummary(
            dataset=d.id,
            source=d.source.table_name,
            source_size=len(d.source),
            target=d.target.table_name,
            target_size=len(d.target),
            pairs=d.pair_count,
            matches=len(b.truth(d.id).pairs),
        )
        for d in b.datasets
    ]


def dump_benchmark(b: Benchmark, directory: PathLike) -> Path:
    """Write an index file plus one JSON document per dataset. Returns the index path."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)

    files = []
    for d in b.datasets:
        filename = f"{d.id}.json"
        (out / filename).write_text(
            json.dumps(d.model_dump(by_alias=True), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        files.append(filename)

    index = {
        "datasets": files,
        "truth": [
            {"dataset": t.dataset_id, "matches": [list(p) for p in t.matches]}
            for t in b.truths
        ],
    }
    manifest = out / MANIFEST_FILENAME
    manifest.write_text(json.dumps(index, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return manifest


# ============================================
# Import
# ============================================

def _read_csv(path: Path, required: List[str]) -> List[Dict[str, str]]:
    if not path.is_file():
        raise ManifestNotFound(f"Import source file missing: {path}")
    with open(path, "r", encoding="utf-8-sig", newline="") as f:
        rows = list(csv.DictReader(f))
    missing = [c for c in required if rows and c not in rows[0]]
    if missing:
        raise SchemaError(f"{path.name} lacks columns {missing}")
    return rows


def import_benchmark(src_dir: PathLike, out_dir: PathLike) -> Benchmark:
    """
    Build a manifest from a normalised data-dictionary export.

    The source directory holds four CSV files:
      tables.csv      table, description
      attributes.csv  table, attribute, description   (attribute order preserved)
      datasets.csv    dataset, source, target
      matches.csv     dataset, source, target
    Tables are shared across datasets, as a target model usually is.
    """
    src = Path(src_dir)
    tables = _read_csv(src / "tables.csv", ["table", "description"])
    attributes = _read_csv(src / "attributes.csv", ["table", "attribute", "description"])
    pairs = _read_csv(src / "datasets.csv", ["dataset", "source", "target"])
    matches = _read_csv(src / "matches.csv", ["dataset", "source", "target"])

    table_docs = {row["table"].strip(): (row.get("description") or "").strip() for row in tables}
    table_attrs: Dict[str, List[Dict[str, str]]] = defaultdict(list)
    for row in attributes:
        table_attrs[row["table"].strip()].append({
            "name": row["attribute"].strip(),
            "description": (row.get("description") or "").strip(),
        })

    def schema_for(table: str) -> Dict[str, Any]:
        if table not in table_docs and table not in table_attrs:
            raise SchemaError(f"datasets.csv references unknown table {table}")
        return {"table": table, "description": table_docs.get(table, ""),
                "attributes": table_attrs.get(table, [])}

    truth: Dict[str, List[Pair]] = defaultdict(list)
    for row in matches:
        truth[row["dataset"].strip()].append((row["source"].strip(), row["target"].strip()))
    unknown = set(truth) - {row["dataset"].strip() for row in pairs}
    if unknown:
        raise TruthError(f"matches.csv references unknown datasets {sorted(unknown)}")

    try:
        b = Benchmark(
            datasets=tuple(
                Dataset.model_validate({
                    "id": row["dataset"].strip(),
                    "source": schema_for(row["source"].strip()),
                    "target": schema_for(row["target"].strip()),
                })
                for row in pairs
            ),
            truths=tuple(
                GroundTruth(dataset=row["dataset"].strip(), matches=tuple(truth[row["dataset"].strip()]))
                for row in pairs
            ),
        )
    except ValidationError as e:
        raise SchemaError(f"Import produced an invalid dataset: {e}") from e

    errors = [d for d in validate_benchmark(b) if d.severity == "error"]
    if errors:
        raise TruthError("; ".join(str(e) for e in errors))

    dump_benchmark(b, out_dir)
    logger.info("Imported %d datasets into %s", len(b.datasets), out_dir)
    return load_benchmark(out_dir)
