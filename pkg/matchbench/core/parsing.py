"""
matchbench - Response Parsing
Locate the JSON payload in a free-form completion, normalise answers to the
yes/no/unknown scale and reduce sampled votes by majority.
"""

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from ..models.schemas import Pair, ResponseKey, TaskScope, VoteValue
from ..utils.logging_utils import get_logger
from .errors import MalformedJson, NoJsonFound, ParseError
from .prompting import PromptJob

logger = get_logger("parse")

_FENCE_RE = re.compile(r"```[ \t]*(?:json|JSON)?[ \t]*\r?\n?(.*?)```", re.DOTALL)
_OPENERS = {"{": "}", "[": "]"}
_SCALE = {v.value: v for v in VoteValue}


@dataclass
class VoteSet:
    """Votes of one completion, total over the job's expected pairs."""
    dataset_id: str
    votes: Dict[Pair, VoteValue]
    key: Optional[ResponseKey] = None
    diagnostics: List[str] = field(default_factory=list)

    def get(self, pair: Pair) -> VoteValue:
        return self.votes.get(pair, VoteValue.UNKNOWN)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset_id,
            "key": self.key.model_dump(mode="json") if self.key else None,
            "votes": [[s, t, v.value] for (s, t), v in self.votes.items()],
            "diagnostics": list(self.diagnostics),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "VoteSet":
        return cls(
            dataset_id=data["dataset"],
            key=ResponseKey.model_validate(data["key"]) if data.get("key") else None,
            votes={(s, t): VoteValue(v) for s, t, v in data["votes"]},
            diagnostics=list(data.get("diagnostics") or []),
        )


# ============================================
# JSON Extraction
# ============================================

def _loads(candidate: str) -> Tuple[bool, Any]:
    try:
        return True, json.loads(candidate)
    except (ValueError, RecursionError):
        return False, None


def _carries_votes(value: Any) -> bool:
    """An object, or a list of objects. Scalars and lists like [1] are prose."""
    if isinstance(value, dict):
        return True
    return isinstance(value, list) and all(isinstance(v, dict) for v in value)


def _balanced_spans(text: str) -> List[Tuple[int, int]]:
    """
    Every balanced {...} / [...] span, ordered by start, in one pass.

    String state is tracked only inside an open span; a mismatched closer
    drops the spans still open. Unclosed openers never produce a span.
    """
    spans: List[Tuple[int, int]] = []
    stack: List[Tuple[int, str]] = []
    in_string = escaped = False
    for i, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch in _OPENERS:
            stack.append((i, _OPENERS[ch]))
        elif not stack:
            continue
        elif ch == '"':
            in_string = True
        elif ch in "}]":
            start, closer = stack.pop()
            if ch == closer:
                spans.append((start, i + 1))
            else:
                stack.clear()
    spans.sort()
    return spans


def extract_json(text: str) -> Any:
    """
    First JSON object (or list of objects) in a completion.

    Order: the whole text, then fenced code blocks, then the outermost
    balanced {...} / [...] spans. Prose around the payload is ignored,
    including bracketed asides such as "[1]" that parse but carry no votes.
    """
    if text is None or not text.strip():
        raise NoJsonFound("Empty completion")

    ok, value = _loads(text.strip())
    if ok and _carries_votes(value):
        return value

    candidates_seen = False
    for match in _FENCE_RE.finditer(text):
        candidates_seen = True
        ok, value = _loads(match.group(1).strip())
        if ok and _carries_votes(value):
            return value

    candidates_seen = candidates_seen or any(opener in text for opener in _OPENERS)
    skip_until = -1
    for start, end in _balanced_spans(text):
        if start < skip_until:
            continue
        ok, value = _loads(text[start:end])
        if ok and _carries_votes(value):
            return value
        if ok:
            skip_until = end

    if candidates_seen:
        raise MalformedJson("No JSON candidate in the completion carries votes")
    raise NoJsonFound("Completion contains no JSON")


# ============================================
# Vote Normalisation
# ============================================

def _answer(raw: Any) -> Tuple[VoteValue, bool]:
    """(vote, on_scale)."""
    if isinstance(raw, str):
        token = raw.strip().strip(".!").casefold()
        if token in _SCALE:
            return _SCALE[token], True
    return VoteValue.UNKNOWN, False


def _resolve(name: Any, candidates: Sequence[str]) -> Optional[str]:
    if not isinstance(name, str):
        return None
    key = name.strip().casefold()
    for candidate in candidates:
        if candidate.casefold() == key:
            return candidate
    return None


def _entries(value: Any, job: PromptJob, diagnostics: List[str]) -> List[Mapping[str, Any]]:
    """Normalise the accepted payload shapes into a list of entry mappings."""
    if isinstance(value, list):
        return value
    if not isinstance(value, dict):
        diagnostics.append(f"payload of type {type(value).__name__} carries no votes")
        return []
    if isinstance(value.get("matches"), list):
        return value["matches"]
    if "answer" in value:
        return [value]

    # flat {name: answer} mapping over the free side of a single-sided scope
    if job.scope is TaskScope.ONE_TO_N:
        return [{"target": k, "answer": v} for k, v in value.items()]
    if job.scope is TaskScope.N_TO_ONE:
        return [{"source": k, "answer": v} for k, v in value.items()]
    diagnostics.append("object has neither 'answer' nor 'matches'")
    return []


def to_votes(value: Any, job: PromptJob, key: Optional[ResponseKey] = None) -> VoteSet:
    """Map a parsed payload onto the job's expected pairs; absent pairs are Unknown."""
    diagnostics: List[str] = []
    votes: Dict[Pair, VoteValue] = {p: VoteValue.UNKNOWN for p in job.pairs}
    assigned: Dict[Pair, int] = {}

    for position, entry in enumerate(_entries(value, job, diagnostics)):
        if not isinstance(entry, dict):
            diagnostics.append(f"entry {position} is not an object, dropped")
            continue

        if "source" in entry:
            source = _resolve(entry["source"], job.source_attrs)
        elif len(job.source_attrs) == 1:
            source = job.source_attrs[0]
        else:
            source = None
        if "target" in entry:
            target = _resolve(entry["target"], job.target_attrs)
        elif len(job.target_attrs) == 1:
            target = job.target_attrs[0]
        else:
            target = None

        if source is None or target is None:
            diagnostics.append(
                f"entry {position} names no expected pair "
                f"(source={entry.get('source')!r}, target={entry.get('target')!r}), dropped"
            )
            continue
        if "answer" not in entry:
            diagnostics.append(f"entry {position} for ({source}, {target}) has no answer, dropped")
            continue

        vote, on_scale = _answer(entry["answer"])
        if not on_scale:
            diagnostics.append(
                f"answer {entry['answer']!r} for ({source}, {target}) is off the scale, read as unknown"
            )
        pair = (source, target)
        if pair in assigned:
            diagnostics.append(f"({source}, {target}) answered more than once, last entry wins")
        assigned[pair] = position
        votes[pair] = vote

    for message in diagnostics:
        logger.warning("[%s job %d] %s", job.dataset_id, job.job_index, message)
    return VoteSet(dataset_id=job.dataset_id, votes=votes, key=key, diagnostics=diagnostics)


def parse_response(text: str, job: PromptJob, key: Optional[ResponseKey] = None) -> VoteSet:
    """extract_json + to_votes; a response without usable JSON gives all Unknown."""
    try:
        value = extract_json(text)
    except ParseError as e:
        logger.warning("[%s job %d] %s", job.dataset_id, job.job_index, e)
        return VoteSet(
            dataset_id=job.dataset_id,
            votes={p: VoteValue.UNKNOWN for p in job.pairs},
            key=key,
            diagnostics=[f"{type(e).__name__}: {e}"],
        )
    return to_votes(value, job, key)


# ============================================
# Majority
# ============================================

def majority_vote(votes: Iterable[VoteValue]) -> VoteValue:
    """Yes or No when strictly more than half the votes agree, otherwise Unknown."""
    votes = list(votes)
    counts = Counter(votes)
    for value in (VoteValue.YES, VoteValue.NO):
        if 2 * counts[value] > len(votes):
            return value
    return VoteValue.UNKNOWN


def majority(v1: VoteValue, v2: VoteValue, v3: VoteValue) -> VoteValue:
    return majority_vote((v1, v2, v3))
