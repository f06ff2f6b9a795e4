"""
Append-only response store.
"""

import json

import pytest

from matchbench.core.errors import StoreCorrupt
from matchbench.models import ResponseKey, TaskScope
from matchbench.services.response_store import RawResponse, ResponseStore, experiment_dir


def _key(job_index=0, vote_index=1, model="gpt-test", run_index=1):
    return ResponseKey(
        dataset_id="patients_person", scope=TaskScope.ONE_TO_N, model=model,
        run_index=run_index, vote_index=vote_index, job_index=job_index,
    )


def test_put_then_get(tmp_path):
    store = ResponseStore(tmp_path)
    stored = store.put(RawResponse(key=_key(), text="hello", token_usage={"total_tokens": 3}))

    assert store.get(_key()) == stored
    assert store.get(_key(job_index=1)) is None

    fresh = ResponseStore(tmp_path).get(_key())
    assert fresh.text == "hello"
    assert fresh.token_usage == {"total_tokens": 3}


def test_existing_key_is_never_overwritten(tmp_path):
    store = ResponseStore(tmp_path)
    first = store.put(RawResponse(key=_key(), text="first"))
    again = store.put(RawResponse(key=_key(), text="second"))

    assert again == first
    assert ResponseStore(tmp_path).get(_key()).text == "first"
    assert len(store.path_for(_key()).read_text(encoding="utf-8").splitlines()) == 1


def test_one_file_per_run(tmp_path):
    store = ResponseStore(tmp_path)
    for run_index in (1, 2):
        for vote_index in (1, 2, 3):
            store.put(RawResponse(key=_key(vote_index=vote_index, run_index=run_index), text="x"))

    directory = experiment_dir(tmp_path, "gpt-test", TaskScope.ONE_TO_N, "patients_person")
    assert sorted(p.name for p in directory.iterdir()) == ["run1.jsonl", "run2.jsonl"]
    assert len(list(store.responses("gpt-test", TaskScope.ONE_TO_N, "patients_person", 2))) == 3


def test_model_names_become_safe_paths(tmp_path):
    store = ResponseStore(tmp_path)
    path = store.path_for(_key(model="org/model:latest"))
    assert path.is_relative_to(tmp_path)
    assert len(path.relative_to(tmp_path).parts) == 4


def test_checksum_mismatch(tmp_path):
    store = ResponseStore(tmp_path)
    store.put(RawResponse(key=_key(), text="original"))
    path = store.path_for(_key())

    record = json.loads(path.read_text(encoding="utf-8"))
    record["text"] = "tampered"
    path.write_text(json.dumps(record) + "\n", encoding="utf-8")

    with pytest.raises(StoreCorrupt, match="checksum"):
        ResponseStore(tmp_path).get(_key())


def test_unreadable_line(tmp_path):
    store = ResponseStore(tmp_path)
    store.put(RawResponse(key=_key(), text="ok"))
    path = store.path_for(_key())
    with open(path, "a", encoding="utf-8") as f:
        f.write("{truncated\n")

    with pytest.raises(StoreCorrupt):
        ResponseStore(tmp_path).get(_key())
