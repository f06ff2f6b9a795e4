"""
matchbench - Response Store
Append-only JSON-Lines cache of raw completions, one file per
(model, scope, dataset, run) under runs/<model>/<scope>/<dataset>/run<k>.jsonl.
"""

import json
import threading
from pathlib import Path
from typing import Dict, Iterator, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..core.errors import StorageError, StoreCorrupt
from ..models.schemas import ResponseKey, TaskScope
from ..utils.helpers import sanitize_filename, sha256_hex, utc_timestamp
from ..utils.logging_utils import get_logger

logger = get_logger("store")


class RawResponse(BaseModel):
    """One completion as received, with the checksum of its text."""
    model_config = ConfigDict(frozen=True)

    key: ResponseKey
    text: str
    timestamp: str = Field(default_factory=utc_timestamp)
    token_usage: Optional[Dict[str, int]] = None

    @property
    def checksum(self) -> str:
        return sha256_hex(self.text)

    def to_line(self) -> str:
        record = self.model_dump(mode="json")
        record["sha256"] = self.checksum
        return json.dumps(record, ensure_ascii=False)


def experiment_dir(root: Union[str, Path], model: str, scope: TaskScope, dataset_id: str) -> Path:
    """runs/<model>/<scope>/<dataset>, every segment sanitised."""
    return (
        Path(root)
        / sanitize_filename(model)
        / sanitize_filename(scope.value)
        / sanitize_filename(dataset_id)
    )


class ResponseStore:
    """
    Store-first cache for completions.

    Existing keys are never overwritten. Writes are serialised by a lock;
    each file is indexed on first access.
    """

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self._lock = threading.Lock()
        self._index: Dict[Path, Dict[str, RawResponse]] = {}

    def path_for(self, key: ResponseKey) -> Path:
        directory = experiment_dir(self.root, key.model, key.scope, key.dataset_id)
        return directory / f"run{key.run_index}.jsonl"

    def _load(self, path: Path) -> Dict[str, RawResponse]:
        if path in self._index:
            return self._index[path]

        entries: Dict[str, RawResponse] = {}
        if path.exists():
            try:
                with open(path, "r", encoding="utf-8") as f:
                    lines = list(f)
            except (OSError, UnicodeDecodeError) as e:
                raise StorageError(f"Cannot read {path}: {e}") from e
            for line_no, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                response = self._decode(line, path, line_no)
                entries.setdefault(response.key.id, response)
        self._index[path] = entries
        return entries

    @staticmethod
    def _decode(line: str, path: Path, line_no: int) -> RawResponse:
        try:
            record = json.loads(line)
            checksum = record.pop("sha256")
            response = RawResponse.model_validate(record)
        except (ValueError, KeyError, TypeError, AttributeError, ValidationError) as e:
            raise StoreCorrupt(f"{path}:{line_no}: unreadable record ({e})") from e
        if response.checksum != checksum:
            raise StoreCorrupt(f"{path}:{line_no}: checksum mismatch")
        return response

    def get(self, key: ResponseKey) -> Optional[RawResponse]:
        return self._load(self.path_for(key)).get(key.id)

    def put(self, response: RawResponse) -> RawResponse:
        """Append a response; returns the stored one if the key already exists."""
        path = self.path_for(response.key)
        with self._lock:
            entries = self._load(path)
            existing = entries.get(response.key.id)
            if existing is not None:
                return existing
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                with open(path, "a", encoding="utf-8") as f:
                    f.write(response.to_line() + "\n")
            except OSError as e:
                raise StorageError(f"Cannot write {path}: {e}") from e
            entries[response.key.id] = response
            logger.debug("Stored response %s", response.key.id)
        return response

    def responses(self, model: str, scope: TaskScope, dataset_id: str, run_index: int) -> Iterator[RawResponse]:
        """Stored responses of one run, in file order."""
        directory = experiment_dir(self.root, model, scope, dataset_id)
        yield from self._load(directory / f"run{run_index}.jsonl").values()

