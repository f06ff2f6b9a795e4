"""
matchbench - Experiment Service
Runs the prompting protocol: every job of a dataset is sent `votes` times,
the sampled votes are reduced by majority per pair, and each run is
persisted next to its raw responses. Suites are resumable.
"""

import asyncio
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from ..config import AppSettings
from ..config.constants import (
    DEFAULT_BACKOFF_BASE_S,
    DEFAULT_BACKOFF_CAP_S,
    DEFAULT_BASE_URL,
    DEFAULT_CONCURRENCY,
    DEFAULT_MAX_RETRIES,
    DEFAULT_MODEL,
    DEFAULT_RUNS,
    DEFAULT_RUNS_DIR,
    DEFAULT_TIMEOUT_S,
    DEFAULT_VOTES,
)
from ..core.errors import ConfigError, MatchbenchError, StorageError, StoreCorrupt
from ..core.llm_client import (
    CompletionRequest,
    CompletionService,
    MockBackend,
    OpenAICompatibleBackend,
    parse_policy,
)
from ..core.parsing import VoteSet, majority_vote, parse_response
from ..core.prompting import PromptTemplate, build_jobs, load_template, render_messages
from ..models.benchmark import load_benchmark, pair_space
from ..models.results import ExperimentRecord, Matching
from ..models.schemas import Benchmark, Dataset, Pair, ResponseKey, TaskScope, VoteValue
from ..utils.helpers import format_duration
from ..utils.logging_utils import get_logger
from .response_store import RawResponse, ResponseStore, experiment_dir

logger = get_logger("experiment")

VOTES_FILE = "votes.jsonl"


# ============================================
# Configuration
# ============================================

@dataclass
class SuiteConfig:
    """Everything one `run` invocation needs."""
    benchmark_path: str
    scopes: List[TaskScope] = field(default_factory=lambda: [TaskScope.ONE_TO_N, TaskScope.N_TO_ONE])
    model: str = DEFAULT_MODEL
    runs: int = DEFAULT_RUNS
    votes: int = DEFAULT_VOTES
    backend: str = "live"
    mock_policy: str = "oracle:eps=0"
    max_requests: Optional[int] = None
    concurrency: int = DEFAULT_CONCURRENCY
    runs_dir: str = DEFAULT_RUNS_DIR
    template_path: Optional[str] = None
    persona_as_system: bool = False
    api_key: Optional[str] = None
    base_url: str = DEFAULT_BASE_URL
    timeout_s: float = DEFAULT_TIMEOUT_S
    max_retries: int = DEFAULT_MAX_RETRIES
    backoff_base_s: float = DEFAULT_BACKOFF_BASE_S
    backoff_cap_s: float = DEFAULT_BACKOFF_CAP_S

    def __post_init__(self):
        self.scopes = [s if isinstance(s, TaskScope) else TaskScope.parse(s) for s in self.scopes]
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.votes < 1 or self.votes % 2 == 0:
            raise ConfigError("votes must be odd and at least 1")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be at least 1")
        if self.backend not in ("live", "mock"):
            raise ConfigError(f"backend must be 'live' or 'mock', got {self.backend!r}")
        if not self.scopes:
            raise ConfigError("at least one scope is required")

    @classmethod
    def from_settings(cls, settings: AppSettings, api_key: Optional[str] = None) -> "SuiteConfig":
        try:
            scopes = [TaskScope.parse(s) for s in settings.experiment.scopes]
        except ValueError as e:
            raise ConfigError(str(e)) from e
        return cls(
            benchmark_path=settings.storage.benchmark_path,
            scopes=scopes,
            model=settings.llm.model,
            runs=settings.experiment.runs,
            votes=settings.experiment.votes,
            backend=settings.llm.backend,
            mock_policy=settings.llm.mock_policy,
            max_requests=settings.llm.max_requests,
            concurrency=settings.llm.concurrency,
            runs_dir=settings.storage.runs_dir,
            template_path=settings.prompt.template_path,
            persona_as_system=settings.prompt.persona_as_system,
            api_key=api_key,
            base_url=settings.base_url,
            timeout_s=settings.llm.timeout_s,
            max_retries=settings.llm.max_retries,
            backoff_base_s=settings.llm.backoff_base_s,
            backoff_cap_s=settings.llm.backoff_cap_s,
        )


def make_backend(cfg: SuiteConfig, benchmark: Benchmark) -> Any:
    """Live client or mock double, as configured."""
    if cfg.backend == "mock":
        return MockBackend(parse_policy(cfg.mock_policy), truth=benchmark.truth_map())
    return OpenAICompatibleBackend(
        api_key=cfg.api_key,
        base_url=cfg.base_url,
        timeout_s=cfg.timeout_s,
        max_retries=cfg.max_retries,
        backoff_base_s=cfg.backoff_base_s,
        backoff_cap_s=cfg.backoff_cap_s,
    )


# ============================================
# Persistence
# ============================================

def record_path(runs_dir: Union[str, Path], model: str, scope: TaskScope, dataset_id: str, run_index: int) -> Path:
    return experiment_dir(runs_dir, model, scope, dataset_id) / f"run{run_index}.matching.json"


def save_record(runs_dir: Union[str, Path], record: ExperimentRecord) -> Path:
    path = record_path(runs_dir, record.model, record.scope, record.dataset_id, record.run_index)
    tmp = path.with_suffix(".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_text(json.dumps(record.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
        tmp.replace(path)
    except OSError as e:
        raise StorageError(f"Cannot write experiment record {path}: {e}") from e
    return path


def _read_record(path: Path) -> ExperimentRecord:
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise StorageError(f"Cannot read experiment record {path}: {e}") from e
    try:
        return ExperimentRecord.from_dict(json.loads(text))
    except (ValueError, KeyError, TypeError) as e:
        raise StoreCorrupt(f"Unreadable experiment record {path}: {e}") from e


def load_records(runs_dir: Union[str, Path], model: Optional[str] = None) -> List[ExperimentRecord]:
    """Every persisted record under runs_dir, sorted by (model, method, dataset, run)."""
    root = Path(runs_dir)
    if not root.is_dir():
        return []
    records = [_read_record(p) for p in sorted(root.glob("*/*/*/run*.matching.json"))]
    if model is not None:
        records = [r for r in records if r.model == model]
    return sorted(records, key=lambda r: r.sort_key)


def _save_votes(directory: Path, run_index: int, vote_sets: Sequence[VoteSet]) -> None:
    """Replace this run's lines in votes.jsonl, keeping the other runs."""
    path = directory / VOTES_FILE
    kept = []
    try:
        existing = path.read_text(encoding="utf-8").splitlines() if path.exists() else []
    except (OSError, UnicodeDecodeError) as e:
        raise StorageError(f"Cannot read {path}: {e}") from e
    for line_no, line in enumerate(existing, start=1):
        if not line.strip():
            continue
        try:
            key = json.loads(line).get("key") or {}
        except (ValueError, AttributeError) as e:
            raise StoreCorrupt(f"{path}:{line_no}: unreadable vote set ({e})") from e
        if key.get("run_index") != run_index:
            kept.append(line)
    lines = kept + [json.dumps(v.to_dict(), ensure_ascii=False) for v in vote_sets]
    try:
        directory.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise StorageError(f"Cannot write {path}: {e}") from e


# ============================================
# Voting
# ============================================

def assemble(
    d: Dataset,
    vote_sets: Sequence[VoteSet],
    votes: int,
) -> Tuple[Matching, Dict[Pair, Tuple[VoteValue, ...]]]:
    """Majority per pair over the vote sets; pairs with missing votes count them as Unknown."""
    by_pair: Dict[Pair, List[Tuple[int, VoteValue]]] = {p: [] for p in pair_space(d)}
    for vote_set in vote_sets:
        index = vote_set.key.vote_index if vote_set.key else 0
        for pair, value in vote_set.votes.items():
            if pair in by_pair:
                by_pair[pair].append((index, value))

    triples: Dict[Pair, Tuple[VoteValue, ...]] = {}
    yes, no = set(), set()
    for pair, cast in by_pair.items():
        ordered = [v for _, v in sorted(cast, key=lambda item: item[0])]
        ordered += [VoteValue.UNKNOWN] * (votes - len(ordered))
        triples[pair] = tuple(ordered)
        final = majority_vote(ordered)
        if final is VoteValue.YES:
            yes.add(pair)
        elif final is VoteValue.NO:
            no.add(pair)
    return Matching(dataset_id=d.id, yes_set=frozenset(yes), no_set=frozenset(no)), triples


# ============================================
# Experiments
# ============================================

async def _obtain(
    key: ResponseKey,
    request: CompletionRequest,
    service: CompletionService,
    store: ResponseStore,
) -> RawResponse:
    """Store first; a fresh completion is persisted as soon as it arrives."""
    cached = store.get(key)
    if cached is not None:
        return cached
    completion = await service.complete(request.model_copy(update={"key": key}))
    return store.put(RawResponse(key=key, text=completion.text, token_usage=completion.token_usage))


async def run_experiment(
    d: Dataset,
    scope: TaskScope,
    model: str,
    service: CompletionService,
    store: ResponseStore,
    benchmark: Benchmark,
    template: PromptTemplate,
    run_index: int = 1,
    votes: int = DEFAULT_VOTES,
) -> ExperimentRecord:
    """
    One run on one dataset: `votes` completions per job, parsed and reduced
    by majority into a Matching over the whole pair space.

    Completions that succeed are stored even when others fail; the first
    failure is re-raised afterwards.
    """
    jobs = build_jobs(d, scope)
    tasks = []
    keys = []
    for job in jobs:
        request = CompletionRequest(model=model, messages=render_messages(job, benchmark, template), job=job)
        for vote_index in range(1, votes + 1):
            key = ResponseKey(
                dataset_id=d.id, scope=scope, model=model,
                run_index=run_index, vote_index=vote_index, job_index=job.job_index,
            )
            keys.append((job, key))
            tasks.append(_obtain(key, request, service, store))

    results = await asyncio.gather(*tasks, return_exceptions=True)
    failures = [r for r in results if isinstance(r, BaseException)]
    if failures:
        logger.error(
            "[%s %s run %d] %d of %d completions failed; %d stored",
            d.id, scope.value, run_index, len(failures), len(results), len(results) - len(failures),
        )
        raise failures[0]

    vote_sets = [parse_response(raw.text, job, key) for (job, key), raw in zip(keys, results)]
    _save_votes(experiment_dir(store.root, model, scope, d.id), run_index, vote_sets)

    matching, triples = assemble(d, vote_sets, votes)
    return ExperimentRecord(
        dataset_id=d.id,
        method=scope.value,
        model=model,
        run_index=run_index,
        matching=matching,
        votes=triples,
        scope=scope,
    )


async def run_suite(
    cfg: SuiteConfig,
    benchmark: Optional[Benchmark] = None,
    backend: Any = None,
) -> List[ExperimentRecord]:
    """runs x scopes x datasets records; runs whose record already exists are loaded, not re-run."""
    benchmark = benchmark or load_benchmark(cfg.benchmark_path)
    template = load_template(cfg.template_path, persona_as_system=cfg.persona_as_system)
    store = ResponseStore(cfg.runs_dir)
    service = CompletionService(
        backend if backend is not None else make_backend(cfg, benchmark),
        concurrency=cfg.concurrency,
        max_requests=cfg.max_requests,
    )

    records: List[ExperimentRecord] = []
    started = time.perf_counter()
    try:
        for scope in cfg.scopes:
            for d in benchmark.datasets:
                for run_index in range(1, cfg.runs + 1):
                    path = record_path(cfg.runs_dir, cfg.model, scope, d.id, run_index)
                    if path.exists():
                        records.append(_read_record(path))
                        continue
                    record = await run_experiment(
                        d, scope, cfg.model, service, store, benchmark, template,
                        run_index=run_index, votes=cfg.votes,
                    )
                    save_record(cfg.runs_dir, record)
                    records.append(record)
                    logger.info(
                        "[%s %s run %d] %d yes, %d no of %d pairs",
                        d.id, scope.value, run_index, len(record.matching.yes_set),
                        len(record.matching.no_set), d.pair_count,
                    )
    finally:
        await service.aclose()
        logger.info(
            "Suite finished in %s: %d records, %d requests issued",
            format_duration((time.perf_counter() - started) * 1000),
            len(records), service.requests_issued,
        )
    return sorted(records, key=lambda r: r.sort_key)


# ============================================
# Record Integrity
# ============================================

@dataclass
class ReplayResult:
    record: ExperimentRecord
    ok: bool
    message: str = ""


def replay_record(record: ExperimentRecord, benchmark: Benchmark, store: ResponseStore) -> Matching:
    """Recompute a record's Matching from its stored raw responses."""
    if record.scope is None:
        raise MatchbenchError(f"Record {record.label} on {record.dataset_id} has no stored responses")
    d = benchmark.dataset(record.dataset_id)
    votes = max((len(t) for t in record.votes.values()), default=1)

    vote_sets = []
    for job in build_jobs(d, record.scope):
        for vote_index in range(1, votes + 1):
            key = ResponseKey(
                dataset_id=d.id, scope=record.scope, model=record.model,
                run_index=record.run_index, vote_index=vote_index, job_index=job.job_index,
            )
            raw = store.get(key)
            if raw is None:
                raise StoreCorrupt(f"Raw response {key.id} missing from the store")
            vote_sets.append(parse_response(raw.text, job, key))
    matching, _ = assemble(d, vote_sets, votes)
    return matching


def verify_records(
    records: Sequence[ExperimentRecord],
    benchmark: Benchmark,
    store: ResponseStore,
) -> List[ReplayResult]:
    """Replay every LLM record and compare with the persisted Matching."""
    results = []
    for record in records:
        if record.scope is None:
            continue
        try:
            replayed = replay_record(record, benchmark, store)
        except (MatchbenchError, KeyError) as e:
            results.append(ReplayResult(record, False, str(e)))
            continue
        if replayed == record.matching:
            results.append(ReplayResult(record, True))
        else:
            results.append(ReplayResult(
                record, False,
                f"replay differs: {len(replayed.yes_set ^ record.matching.yes_set)} yes and "
                f"{len(replayed.no_set ^ record.matching.no_set)} no pairs",
            ))
    return results
