"""
matchbench - Pydantic Schemas
Benchmark data model: attributes, schemas, datasets and ground truth.
"""

from enum import Enum
from typing import Dict, FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

# (source attribute name, target attribute name)
Pair = Tuple[str, str]


# ============ Enums ============

class TaskScope(str, Enum):
    """How much schema information one prompt carries."""
    ONE_TO_ONE = "1-to-1"
    ONE_TO_N = "1-to-N"
    N_TO_ONE = "N-to-1"
    N_TO_M = "N-to-M"

    @classmethod
    def parse(cls, value: str) -> "TaskScope":
        """Accept '1-to-N', '1-N', 'one_to_n' and similar spellings."""
        key = value.strip().lower().replace("_", "-").replace("to-", "").replace("-to", "")
        aliases = {
            "1-1": cls.ONE_TO_ONE, "one-one": cls.ONE_TO_ONE, "onetoone": cls.ONE_TO_ONE,
            "1-n": cls.ONE_TO_N, "one-n": cls.ONE_TO_N, "oneton": cls.ONE_TO_N,
            "n-1": cls.N_TO_ONE, "n-one": cls.N_TO_ONE, "ntoone": cls.N_TO_ONE,
            "n-m": cls.N_TO_M, "ntom": cls.N_TO_M,
        }
        if key in aliases:
            return aliases[key]
        raise ValueError(f"Unknown task scope: {value}")


class MessageRole(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


class VoteValue(str, Enum):
    """Three-step answer scale."""
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


# ============ Manifest Schemas ============

class Attribute(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = Field(..., min_length=1)
    description: str = ""

    @property
    def key(self) -> str:
        return self.name.casefold()


class Schema(BaseModel):
    """One relational table: name, documentation and ordered attributes."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    table_name: str = Field(..., alias="table")
    table_description: str = Field(default="", alias="description")
    attributes: Tuple[Attribute, ...]

    def __len__(self) -> int:
        return len(self.attributes)

    @property
    def names(self) -> List[str]:
        return [a.name for a in self.attributes]

    def find(self, name: str) -> Optional[Attribute]:
        """Case-insensitive attribute lookup."""
        key = name.strip().casefold()
        for attr in self.attributes:
            if attr.key == key:
                return attr
        return None


class Dataset(BaseModel):
    """A source/target table pair to be matched."""
    model_config = ConfigDict(frozen=True)

    id: str = Field(..., min_length=1)
    source: Schema
    target: Schema

    @property
    def pair_count(self) -> int:
        return len(self.source) * len(self.target)


class GroundTruth(BaseModel):
    """Valid 1:1 matches of one dataset, in manifest order."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    dataset_id: str = Field(..., alias="dataset")
    matches: Tuple[Pair, ...] = ()

    @property
    def pairs(self) -> FrozenSet[Pair]:
        return frozenset(self.matches)


class Benchmark(BaseModel):
    model_config = ConfigDict(frozen=True)

    datasets: Tuple[Dataset, ...]
    truths: Tuple[GroundTruth, ...] = ()

    def dataset(self, dataset_id: str) -> Dataset:
        for d in self.datasets:
            if d.id == dataset_id:
                return d
        raise KeyError(dataset_id)

    def truth(self, dataset_id: str) -> GroundTruth:
        for t in self.truths:
            if t.dataset_id == dataset_id:
                return t
        return GroundTruth(dataset=dataset_id)

    @property
    def ids(self) -> List[str]:
        return [d.id for d in self.datasets]

    def truth_map(self) -> Dict[str, FrozenSet[Pair]]:
        return {d.id: self.truth(d.id).pairs for d in self.datasets}


# ============ Chat Schemas ============

class ChatMessage(BaseModel):
    model_config = ConfigDict(frozen=True)

    role: MessageRole
    content: str


# ============ Experiment Schemas ============

class ResponseKey(BaseModel):
    """Identifies one sampled completion: (dataset, scope, model, run, vote, job)."""
    model_config = ConfigDict(frozen=True)

    dataset_id: str
    scope: TaskScope
    model: str
    run_index: int = Field(..., ge=1)
    vote_index: int = Field(..., ge=1)
    job_index: int = Field(..., ge=0)

    @property
    def id(self) -> str:
        return (
            f"{self.dataset_id}|{self.scope.value}|{self.model}"
            f"|r{self.run_index}|v{self.vote_index}|j{self.job_index}"
        )
