"""
Command line: exit codes and the files each command writes.
"""

import csv

import pytest

from matchbench.cli import main

from conftest import write_json


def _read_csv(path):
    with open(path, encoding="utf-8") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def mock_runs(mini_path, tmp_path):
    """Runs directory filled by a noise-free mock suite."""
    runs_dir = tmp_path / "runs"
    code = main([
        "-q", "run",
        "--benchmark", str(mini_path),
        "--scope", "1-to-N", "--scope", "N-to-1",
        "--runs", "2", "--votes", "3",
        "--backend", "mock", "--mock-policy", "oracle:eps=0",
        "--model", "mock-model",
        "--runs-dir", str(runs_dir),
    ])
    assert code == 0
    return runs_dir


# ============================================
# Exit codes
# ============================================

def test_validate_mini(mini_path, capsys):
    assert main(["validate", str(mini_path)]) == 0
    out = capsys.readouterr().out
    assert "patients_person" in out
    assert "84" in out


def test_validate_reports_broken_truth(tmp_path, capsys):
    write_json(tmp_path / "benchmark.json", {
        "datasets": [{
            "id": "d1",
            "source": {"table": "s", "attributes": [{"name": "a"}]},
            "target": {"table": "t", "attributes": [{"name": "b"}]},
        }],
        "truth": [{"dataset": "d1", "matches": [["a", "missing"]]}],
    })
    assert main(["validate", str(tmp_path)]) == 1
    assert "unknown_attribute" in capsys.readouterr().err


def test_missing_benchmark_is_a_domain_error(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "absent")]) == 1
    assert "error:" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["validate", "--no-such-option"],
    ["no-such-command"],
    ["run", "--runs", "many"],
    ["run", "--scope", "2-to-2", "--backend", "mock"],
])
def test_usage_errors(argv):
    assert main(argv) == 2


def test_even_votes_are_a_config_error(mini_path, tmp_path):
    code = main([
        "run", "--benchmark", str(mini_path), "--votes", "2",
        "--backend", "mock", "--runs-dir", str(tmp_path / "runs"),
    ])
    assert code == 1


def test_live_backend_without_key(mini_path, tmp_path):
    code = main([
        "-q", "run", "--benchmark", str(mini_path), "--runs", "1",
        "--backend", "live", "--runs-dir", str(tmp_path / "runs"),
    ])
    assert code == 1


# ============================================
# Commands
# ============================================

def test_baseline_writes_tables(mini_path, tmp_path, capsys):
    out = tmp_path / "reports"
    assert main(["baseline", "--benchmark", str(mini_path), "--out", str(out), "--compare"]) == 0

    rows = _read_csv(out / "baseline_ngram.csv")
    assert [r["dataset"] for r in rows] == ["patients_person", "admissions_visit", "labevents_measurement"]
    assert all(0.0 <= float(r["f1"]) <= 1.0 for r in rows)
    assert (out / "baseline_ngram.md").is_file()
    assert {r["metric"] for r in _read_csv(out / "pr_auc.csv")} == {
        "ngram", "jaro_winkler", "levenshtein", "monge_elkan",
    }
    assert "mean" in capsys.readouterr().out


def test_run_then_evaluate(mini_path, mock_runs, tmp_path):
    out = tmp_path / "reports"
    assert main(["evaluate", "--runs-dir", str(mock_runs), "--benchmark", str(mini_path), "--out", str(out)]) == 0

    medians = _read_csv(out / "median_f1.csv")
    llm = [r for r in medians if r["method"].startswith("mock-model:")]
    assert {r["method"] for r in llm} == {"mock-model:1-to-N", "mock-model:N-to-1"}
    assert all(float(r["f1"]) == 1.0 for r in llm)
    assert any(r["method"] == "ngram" for r in medians)

    assert len(_read_csv(out / "metrics.csv")) == 2 * 3 * 2 + 3 * 2
    assert (out / "decisiveness.csv").is_file()
    consistency = {r["method"]: float(r["sd_f1"]) for r in _read_csv(out / "consistency.csv")}
    assert consistency["mock-model:1-to-N"] == 0.0


def test_evaluate_with_verification(mini_path, mock_runs, tmp_path, capsys):
    code = main([
        "evaluate", "--runs-dir", str(mock_runs), "--benchmark", str(mini_path),
        "--out", str(tmp_path / "reports"), "--verify",
    ])
    assert code == 0
    assert "verified 12/12 records" in capsys.readouterr().out


def test_evaluate_without_runs(mini_path, tmp_path):
    code = main(["evaluate", "--runs-dir", str(tmp_path / "empty"), "--benchmark", str(mini_path)])
    assert code == 1


def test_combine(mini_path, mock_runs, tmp_path):
    out = tmp_path / "reports"
    code = main([
        "combine", "--methods", "ngram,1-to-N,N-to-1",
        "--runs-dir", str(mock_runs), "--benchmark", str(mini_path), "--out", str(out),
    ])
    assert code == 0

    tp = {r["method"]: r for r in _read_csv(out / "mock-model_combined_tp.csv")}
    assert set(tp) == {"ngram", "mock-model:1-to-N", "mock-model:N-to-1"}
    # a perfect method finds all 11 true matches alone and in every union
    assert float(tp["mock-model:1-to-N"]["mock-model:1-to-N"]) == 11.0
    assert float(tp["ngram"]["mock-model:N-to-1"]) == 11.0
    assert (out / "mock-model_combined_effort.csv").is_file()
    assert (out / "mock-model_combined_f1.md").is_file()
    assert (out / "mock-model_combined_per_dataset.csv").is_file()


def test_combine_unknown_method(mini_path, mock_runs, tmp_path):
    code = main([
        "combine", "--methods", "ngram,telepathy",
        "--runs-dir", str(mock_runs), "--benchmark", str(mini_path), "--out", str(tmp_path / "r"),
    ])
    assert code == 1


def test_report(mini_path, mock_runs, tmp_path):
    out = tmp_path / "reports"
    assert main(["report", "--runs-dir", str(mock_runs), "--benchmark", str(mini_path), "--out", str(out)]) == 0
    for name in ("benchmark.md", "baseline_ngram.csv", "pr_ngram.csv", "median_f1.md", "mock-model_combined_tp.csv"):
        assert (out / name).is_file(), name

    overview = _read_csv(out / "benchmark.csv")
    assert overview[-1]["dataset"] == "Total"
    assert overview[-1]["pairs"] == "84"
    assert overview[-1]["matches"] == "11"


def test_import_benchmark_command(tmp_path):
    src = tmp_path / "export"
    src.mkdir()
    (src / "tables.csv").write_text("table,description\ns,Source\nt,Target\n", encoding="utf-8")
    (src / "attributes.csv").write_text(
        "table,attribute,description\ns,id,\ns,name,\nt,key,\nt,label,\n", encoding="utf-8",
    )
    (src / "datasets.csv").write_text("dataset,source,target\nst,s,t\n", encoding="utf-8")
    (src / "matches.csv").write_text("dataset,source,target\nst,id,key\n", encoding="utf-8")

    assert main(["import-benchmark", str(src), str(tmp_path / "bench")]) == 0
    assert main(["validate", str(tmp_path / "bench")]) == 0


def test_baseline_out_accepts_a_csv_path(mini_path, tmp_path):
    target = tmp_path / "tables" / "ngram_baseline.csv"
    assert main(["baseline", "--benchmark", str(mini_path), "--out", str(target)]) == 0
    assert [r["dataset"] for r in _read_csv(target)] == [
        "patients_person", "admissions_visit", "labevents_measurement",
    ]
    assert target.with_suffix(".md").is_file()


# ============================================
# Help & idempotence
# ============================================

DOCUMENTED_FLAGS = [
    "--metric", "--benchmark", "--out", "--scope", "--model", "--runs", "--backend",
    "--mock-policy", "--runs-dir", "--methods", "--template", "--concurrency",
]


def test_help_lists_every_documented_flag(monkeypatch, capsys):
    monkeypatch.setenv("COLUMNS", "200")
    shown = ""
    for command in ("validate", "import-benchmark", "baseline", "run", "evaluate", "combine", "report"):
        assert main([command, "--help"]) == 0
        shown += capsys.readouterr().out
    for flag in DOCUMENTED_FLAGS:
        assert flag in shown, flag


def _snapshot(directory):
    return {p.relative_to(directory): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


@pytest.mark.parametrize("command", ["evaluate", "combine", "report"])
def test_reports_are_idempotent(mini_path, mock_runs, tmp_path, command):
    out = tmp_path / "reports"
    argv = [command, "--runs-dir", str(mock_runs), "--benchmark", str(mini_path), "--out", str(out)]
    assert main(argv) == 0
    first = _snapshot(out)
    assert first

    assert main(argv) == 0
    assert _snapshot(out) == first


def test_rerun_over_complete_store_changes_nothing(mini_path, mock_runs):
    before = _snapshot(mock_runs)
    code = main([
        "-q", "run", "--benchmark", str(mini_path),
        "--scope", "1-to-N", "--scope", "N-to-1", "--runs", "2", "--votes", "3",
        "--backend", "mock", "--mock-policy", "oracle:eps=0", "--model", "mock-model",
        "--runs-dir", str(mock_runs),
    ])
    assert code == 0
    assert _snapshot(mock_runs) == before


# ============================================
# Filesystem failures
# ============================================

def test_runs_dir_that_is_a_file(mini_path, tmp_path, capsys):
    blocker = tmp_path / "runs"
    blocker.write_text("not a directory", encoding="utf-8")
    code = main([
        "-q", "run", "--benchmark", str(mini_path), "--runs", "1",
        "--backend", "mock", "--runs-dir", str(blocker),
    ])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_damaged_votes_file(mini_path, mock_runs, capsys):
    votes = next(mock_runs.glob("mock-model/*/patients_person/votes.jsonl"))
    votes.write_text("{not json\n", encoding="utf-8")
    code = main([
        "-q", "run", "--benchmark", str(mini_path), "--scope", "1-to-N", "--scope", "N-to-1",
        "--runs", "3", "--votes", "3", "--backend", "mock", "--model", "mock-model",
        "--runs-dir", str(mock_runs),
    ])
    assert code == 1
    assert "votes.jsonl" in capsys.readouterr().err


def test_report_dir_that_is_a_file(mini_path, tmp_path):
    blocker = tmp_path / "reports"
    blocker.write_text("", encoding="utf-8")
    assert main(["baseline", "--benchmark", str(mini_path), "--out", str(blocker)]) == 1
