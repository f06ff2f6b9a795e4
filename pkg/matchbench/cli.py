"""
matchbench - Command Line
validate, import-benchmark, baseline, run, evaluate, combine and report.

Exit codes: 0 success, 1 domain error, 2 usage error. Diagnostics go to
stderr through the matchbench logger; tables go to files or stdout.
"""

import asyncio
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import click
import typer
from typing_extensions import Annotated

from .config import get_settings_manager
from .config.constants import BASELINE_MODEL, DEFAULT_METRIC
from .config.settings import SettingsManager
from .core.errors import ConfigError, MatchbenchError
from .core.similarity import Metric
from .models.benchmark import import_benchmark, load_benchmark, read_benchmark, validate_benchmark
from .models.results import ExperimentRecord
from .models.schemas import Benchmark, TaskScope
from .services.baseline_service import compare_metrics, run_baseline
from .services.evaluation_service import combination_tables, evaluate_records, median_table
from .services.experiment_service import SuiteConfig, load_records, run_suite, verify_records
from .services.report_service import (
    benchmark_frame,
    median_frames,
    write_baseline_report,
    write_benchmark_report,
    write_combination_report,
    write_evaluation_report,
    write_pr_report,
)
from .services.response_store import ResponseStore
from .utils.logging_utils import enable_logging, get_logger

logger = get_logger("cli")

cli_app = typer.Typer(
    help="matchbench - schema matching baselines and LLM matching experiments",
    pretty_exceptions_show_locals=False,
    no_args_is_help=True,
    add_completion=False,
)


@cli_app.callback()
def _global_options(
    ctx: typer.Context,
    verbose: Annotated[bool, typer.Option("-v", "--verbose", help="Debug logging")] = False,
    quiet: Annotated[bool, typer.Option("-q", "--quiet", help="Errors only")] = False,
    config: Annotated[
        Optional[Path], typer.Option("--config", help="JSON config file (default: matchbench.json)")
    ] = None,
):
    if config is not None:
        os.environ["MATCHBENCH_CONFIG"] = str(config)
    SettingsManager.reset()
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.INFO
    ctx.obj = {"level": level}


def _level(ctx: typer.Context) -> int:
    return (ctx.obj or {}).get("level", logging.INFO)


def _benchmark_path(path: Optional[str]) -> str:
    return path or get_settings_manager().settings.storage.benchmark_path


# ============================================
# Benchmark
# ============================================

@cli_app.command()
def validate(
    ctx: typer.Context,
    path: Annotated[Optional[str], typer.Argument(help="Benchmark directory or manifest")] = None,
):
    """Check a benchmark manifest and print its overview table."""
    with enable_logging(_level(ctx)):
        b = read_benchmark(_benchmark_path(path))
        diagnostics = validate_benchmark(b)
        for d in diagnostics:
            typer.echo(str(d), err=True)
        if any(d.severity == "error" for d in diagnostics):
            raise typer.Exit(code=1)
        typer.echo(benchmark_frame(b).to_markdown(index=False))


@cli_app.command("import-benchmark")
def import_benchmark_command(
    ctx: typer.Context,
    src: Annotated[Path, typer.Argument(help="Directory with tables/attributes/datasets/matches CSV files")],
    out: Annotated[Path, typer.Argument(help="Output manifest directory")],
):
    """Convert a CSV data-dictionary export into a benchmark manifest."""
    with enable_logging(_level(ctx)):
        b = import_benchmark(src, out)
        typer.echo(benchmark_frame(b).to_markdown(index=False))


# ============================================
# Baseline
# ============================================

@cli_app.command()
def baseline(
    ctx: typer.Context,
    metric: Annotated[str, typer.Option(help="ngram, jaro_winkler, levenshtein or monge_elkan")] = DEFAULT_METRIC,
    benchmark: Annotated[Optional[str], typer.Option(help="Benchmark directory or manifest")] = None,
    out: Annotated[
        Optional[Path],
        typer.Option(help="Report directory, or a .csv file for the baseline table (Markdown copy alongside)"),
    ] = None,
    compare: Annotated[bool, typer.Option("--compare", help="Also write PR curves of all metrics")] = False,
):
    """String-similarity baseline at the best-F1 threshold per dataset."""
    with enable_logging(_level(ctx)):
        settings = get_settings_manager().settings
        out_dir, table_name = out or Path(settings.storage.reports_dir), None
        if out is not None and out.suffix.lower() == ".csv":
            out_dir, table_name = out.parent, out.stem
        b = load_benchmark(_benchmark_path(benchmark))

        result = run_baseline(b, metric, runs=1)
        write_baseline_report(result, out_dir, name=table_name)
        for row in result.rows:
            typer.echo(f"{row.dataset_id}\t{row.f1:.3f}\t({row.precision:.2f}, {row.recall:.2f})")
        mean_f1 = sum(r.f1 for r in result.rows) / len(result.rows)
        typer.echo(f"mean\t{mean_f1:.3f}")

        if compare:
            curves = compare_metrics(b)
            write_pr_report(curves, out_dir)
            for m, curve in curves.items():
                typer.echo(f"auc\t{m.value}\t{curve.auc:.4f}")


# ============================================
# Experiments
# ============================================

@cli_app.command()
def run(
    ctx: typer.Context,
    benchmark: Annotated[Optional[str], typer.Option(help="Benchmark directory or manifest")] = None,
    scope: Annotated[
        Optional[List[str]], typer.Option("--scope", help="Task scope; repeatable (1-to-1, 1-to-N, N-to-1, N-to-M)")
    ] = None,
    model: Annotated[Optional[str], typer.Option(help="Chat model name")] = None,
    runs: Annotated[Optional[int], typer.Option(help="Repetitions per experiment")] = None,
    votes: Annotated[Optional[int], typer.Option(help="Completions per prompt (odd)")] = None,
    backend: Annotated[Optional[str], typer.Option(help="live or mock")] = None,
    mock_policy: Annotated[
        Optional[str], typer.Option("--mock-policy", help="e.g. oracle:eps=0.1,seed=7 or constant:unknown")
    ] = None,
    max_requests: Annotated[Optional[int], typer.Option("--max-requests", help="Request budget")] = None,
    concurrency: Annotated[Optional[int], typer.Option(help="Requests in flight")] = None,
    template: Annotated[Optional[str], typer.Option(help="Prompt template file")] = None,
    persona_as_system: Annotated[
        Optional[bool], typer.Option("--persona-as-system/--persona-in-prompt", help="Where the persona goes")
    ] = None,
    runs_dir: Annotated[Optional[str], typer.Option("--runs-dir", help="Output directory for runs")] = None,
):
    """Prompt the model on every dataset and scope, persisting responses and matchings."""
    with enable_logging(_level(ctx)):
        for item in scope or []:
            try:
                TaskScope.parse(item)
            except ValueError as e:
                raise typer.BadParameter(str(e), param_hint="--scope") from None
        manager = get_settings_manager()
        manager.update(
            llm={
                "model": model, "backend": backend, "mock_policy": mock_policy,
                "max_requests": max_requests, "concurrency": concurrency,
            },
            experiment={"runs": runs, "votes": votes, "scopes": scope or None},
            prompt={"template_path": template, "persona_as_system": persona_as_system},
            storage={"benchmark_path": benchmark, "runs_dir": runs_dir},
        )
        cfg = SuiteConfig.from_settings(manager.settings, api_key=manager.api_key())
        records = asyncio.run(run_suite(cfg))
        typer.echo(f"{len(records)} records under {cfg.runs_dir}")


# ============================================
# Evaluation
# ============================================

def _with_baseline(records: List[ExperimentRecord], b: Benchmark, metric: str) -> List[ExperimentRecord]:
    """LLM records plus baseline records repeated to the largest run count."""
    runs = max((r.run_index for r in records), default=1)
    return run_baseline(b, metric, runs=runs).records + records


@cli_app.command()
def evaluate(
    ctx: typer.Context,
    runs_dir: Annotated[Optional[str], typer.Option("--runs-dir", help="Directory with persisted runs")] = None,
    benchmark: Annotated[Optional[str], typer.Option(help="Benchmark directory or manifest")] = None,
    out: Annotated[Optional[Path], typer.Option(help="Report directory")] = None,
    metric: Annotated[str, typer.Option(help="Baseline metric included in the tables")] = DEFAULT_METRIC,
    verify: Annotated[bool, typer.Option("--verify", help="Replay stored responses and check every record")] = False,
):
    """Median F1 (precision, recall), decisiveness and consistency tables."""
    with enable_logging(_level(ctx)):
        settings = get_settings_manager().settings
        runs_root = runs_dir or settings.storage.runs_dir
        b = load_benchmark(_benchmark_path(benchmark))
        records = load_records(runs_root)
        if not records:
            raise MatchbenchError(f"No experiment records under {runs_root}")

        if verify:
            results = verify_records(records, b, ResponseStore(runs_root))
            failed = [r for r in results if not r.ok]
            for r in failed:
                logger.error("%s %s run %d: %s", r.record.label, r.record.dataset_id, r.record.run_index, r.message)
            typer.echo(f"verified {len(results) - len(failed)}/{len(results)} records")
            if failed:
                raise typer.Exit(code=1)

        rows = evaluate_records(_with_baseline(records, b, metric), b)
        write_evaluation_report(rows, out or Path(settings.storage.reports_dir))
        typer.echo(median_frames(median_table(rows))["wide"].to_markdown(index=False))


def _resolve_methods(methods: Optional[str], model: str, available: Sequence[str]) -> Optional[List[str]]:
    """Map 'ngram,1-to-N' style names onto record labels of one model."""
    if not methods:
        return None
    labels = []
    for item in (m.strip() for m in methods.split(",") if m.strip()):
        if item in available:
            labels.append(item)
            continue
        try:
            labels.append(Metric.parse(item).value)
            continue
        except MatchbenchError:
            pass
        try:
            labels.append(f"{model}:{TaskScope.parse(item).value}")
        except ValueError:
            raise ConfigError(f"Unknown method {item!r}; available: {', '.join(available)}") from None
    return labels


def _combine_per_model(
    records: List[ExperimentRecord],
    b: Benchmark,
    metric: str,
    methods: Optional[str],
    out_dir: Path,
) -> Dict[str, List[str]]:
    """One set of combination tables per model, each including the baseline."""
    done = {}
    for model in sorted({r.model for r in records if r.model != BASELINE_MODEL}):
        own = [r for r in records if r.model == model]
        pool = _with_baseline(own, b, metric)
        available = list(dict.fromkeys(r.label for r in pool))
        labels = _resolve_methods(methods, model, available)
        if labels:
            pool = [r for r in pool if r.label in labels]
        tables = combination_tables(pool, b, labels)
        write_combination_report(tables, out_dir, prefix=model)
        done[model] = tables.methods
    return done


@cli_app.command()
def combine(
    ctx: typer.Context,
    methods: Annotated[
        Optional[str], typer.Option(help="Comma separated, e.g. ngram,1-to-N,N-to-1 (default: all)")
    ] = None,
    runs_dir: Annotated[Optional[str], typer.Option("--runs-dir", help="Directory with persisted runs")] = None,
    benchmark: Annotated[Optional[str], typer.Option(help="Benchmark directory or manifest")] = None,
    out: Annotated[Optional[Path], typer.Option(help="Report directory")] = None,
    metric: Annotated[str, typer.Option(help="Baseline metric")] = DEFAULT_METRIC,
):
    """True matches, verification effort and F1 of method unions over all run pairs."""
    with enable_logging(_level(ctx)):
        settings = get_settings_manager().settings
        runs_root = runs_dir or settings.storage.runs_dir
        b = load_benchmark(_benchmark_path(benchmark))
        records = load_records(runs_root)
        if not records:
            raise MatchbenchError(f"No experiment records under {runs_root}")
        done = _combine_per_model(records, b, metric, methods, out or Path(settings.storage.reports_dir))
        for model, labels in done.items():
            typer.echo(f"{model}: {', '.join(labels)}")


@cli_app.command()
def report(
    ctx: typer.Context,
    runs_dir: Annotated[Optional[str], typer.Option("--runs-dir", help="Directory with persisted runs")] = None,
    benchmark: Annotated[Optional[str], typer.Option(help="Benchmark directory or manifest")] = None,
    out: Annotated[Optional[Path], typer.Option(help="Report directory")] = None,
    metric: Annotated[str, typer.Option(help="Baseline metric")] = DEFAULT_METRIC,
):
    """Every table: benchmark overview, baseline, PR curves and, when runs exist, evaluation and combination."""
    with enable_logging(_level(ctx)):
        settings = get_settings_manager().settings
        out_dir = out or Path(settings.storage.reports_dir)
        runs_root = runs_dir or settings.storage.runs_dir
        b = load_benchmark(_benchmark_path(benchmark))

        write_benchmark_report(b, out_dir)
        write_baseline_report(run_baseline(b, metric, runs=1), out_dir)
        write_pr_report(compare_metrics(b), out_dir)

        records = load_records(runs_root)
        if records:
            write_evaluation_report(evaluate_records(_with_baseline(records, b, metric), b), out_dir)
            _combine_per_model(records, b, metric, None, out_dir)
        else:
            logger.info("No records under %s; evaluation tables skipped", runs_root)
        typer.echo(f"reports written to {out_dir}")


# ============================================
# Entry Points
# ============================================

def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    args = list(sys.argv[1:] if argv is None else argv)
    command = typer.main.get_command(cli_app)
    try:
        result = command.main(args=args, prog_name="matchbench", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.exceptions.UsageError as e:
        e.show()
        return 2
    except click.exceptions.Abort:
        typer.echo("aborted", err=True)
        return 1
    except (MatchbenchError, OSError) as e:
        typer.echo(f"error: {e}", err=True)
        return 1
    return result if isinstance(result, int) else 0


def cli_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    cli_main()
