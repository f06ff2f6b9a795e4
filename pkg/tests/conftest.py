"""
Shared fixtures: the bundled mini benchmark, isolated settings and small
hand-built datasets.
"""

import json
import os
from pathlib import Path
from typing import Iterable, Tuple

import pytest

from matchbench.config.settings import SettingsManager
from matchbench.core.prompting import load_template
from matchbench.models import Attribute, Benchmark, Dataset, GroundTruth, Schema, load_benchmark

ROOT = Path(__file__).resolve().parent.parent
MINI_PATH = ROOT / "bench" / "mini"


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    """No MATCHBENCH_* variables and no config file leak into a test."""
    for name in list(os.environ):
        if name.startswith("MATCHBENCH_"):
            monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("MATCHBENCH_CONFIG", str(tmp_path / "no-config.json"))
    SettingsManager.reset()
    yield
    SettingsManager.reset()


@pytest.fixture
def mini_path() -> Path:
    return MINI_PATH


@pytest.fixture
def mini() -> Benchmark:
    return load_benchmark(MINI_PATH)


@pytest.fixture
def template():
    return load_template()


@pytest.fixture
def runs_dir(tmp_path) -> Path:
    return tmp_path / "runs"


def make_schema(table: str, names: Iterable[str], description: str = "") -> Schema:
    return Schema(
        table=table,
        description=description,
        attributes=tuple(Attribute(name=n, description=f"{n} column") for n in names),
    )


def make_dataset(dataset_id: str, n_source: int, n_target: int) -> Dataset:
    """Dataset with attributes a1..aN and b1..bM."""
    return Dataset(
        id=dataset_id,
        source=make_schema("src", [f"a{i}" for i in range(1, n_source + 1)]),
        target=make_schema("tgt", [f"b{j}" for j in range(1, n_target + 1)]),
    )


def make_truth(dataset_id: str, pairs: Iterable[Tuple[str, str]]) -> GroundTruth:
    return GroundTruth(dataset=dataset_id, matches=tuple(pairs))


def write_json(path: Path, data) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2), encoding="utf-8")
    return path
