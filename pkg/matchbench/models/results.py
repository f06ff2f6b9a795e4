"""
matchbench - Result Types
Matchings and experiment records, with their JSON forms.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, Mapping, Optional, Tuple

from ..config.constants import BASELINE_MODEL
from ..core.errors import EvaluationError
from .schemas import Pair, TaskScope, VoteValue


def _pairs_json(pairs: Iterable[Pair]) -> list:
    return [list(p) for p in sorted(pairs)]


@dataclass(frozen=True)
class Matching:
    """Yes-set P+ and no-set P- of a dataset; every other pair is unknown."""
    dataset_id: str
    yes_set: FrozenSet[Pair] = frozenset()
    no_set: FrozenSet[Pair] = frozenset()

    def __post_init__(self):
        overlap = self.yes_set & self.no_set
        if overlap:
            raise EvaluationError(
                f"Matching for {self.dataset_id} has pairs in both P+ and P-: {sorted(overlap)[:3]}"
            )

    def decided(self) -> FrozenSet[Pair]:
        return self.yes_set | self.no_set

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset_id,
            "yes": _pairs_json(self.yes_set),
            "no": _pairs_json(self.no_set),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Matching":
        return cls(
            dataset_id=data["dataset"],
            yes_set=frozenset((s, t) for s, t in data.get("yes", [])),
            no_set=frozenset((s, t) for s, t in data.get("no", [])),
        )


@dataclass
class ExperimentRecord:
    """
    One run of one method on one dataset.

    LLM records carry the sampled votes per pair and their scope; baseline
    records have model "baseline", the metric as method and no votes.
    """
    dataset_id: str
    method: str
    model: str
    run_index: int
    matching: Matching
    votes: Dict[Pair, Tuple[VoteValue, ...]] = field(default_factory=dict)
    scope: Optional[TaskScope] = None

    @property
    def label(self) -> str:
        """Method id used in report tables."""
        if self.model == BASELINE_MODEL:
            return self.method
        return f"{self.model}:{self.method}"

    @property
    def sort_key(self) -> Tuple[str, str, str, int]:
        return (self.model, self.method, self.dataset_id, self.run_index)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset_id,
            "method": self.method,
            "model": self.model,
            "run": self.run_index,
            "scope": self.scope.value if self.scope else None,
            "matching": self.matching.to_dict(),
            "votes": [
                [s, t, [v.value for v in triple]]
                for (s, t), triple in sorted(self.votes.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentRecord":
        return cls(
            dataset_id=data["dataset"],
            method=data["method"],
            model=data["model"],
            run_index=int(data["run"]),
            scope=TaskScope(data["scope"]) if data.get("scope") else None,
            matching=Matching.from_dict(data["matching"]),
            votes={
                (s, t): tuple(VoteValue(v) for v in triple)
                for s, t, triple in data.get("votes", [])
            },
        )
