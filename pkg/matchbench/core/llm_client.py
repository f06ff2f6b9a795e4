"""
matchbench - LLM Backends
OpenAI-compatible chat-completions client, a deterministic mock backend and a
completion service that bounds concurrency and the request budget.
"""

import asyncio
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Awaitable, Callable, Dict, FrozenSet, List, Literal, Mapping, Optional

import httpx
from pydantic import BaseModel, ConfigDict, Field, field_validator
from tenacity import (
    AsyncRetrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
    wait_random_exponential,
)

from ..config.constants import (
    DEFAULT_BACKOFF_BASE_S,
    DEFAULT_BACKOFF_CAP_S,
    DEFAULT_BASE_URL,
    DEFAULT_CONCURRENCY,
    DEFAULT_MAX_RETRIES,
    DEFAULT_TIMEOUT_S,
)
from ..models.schemas import ChatMessage, Pair, ResponseKey, TaskScope, VoteValue
from ..utils.helpers import unit_interval
from ..utils.logging_utils import get_logger
from .errors import (
    AuthError,
    BudgetExceeded,
    ConfigError,
    LLMError,
    RateLimitExhausted,
    TransportError,
)
from .prompting import PromptJob

logger = get_logger("llm")

RETRYABLE_STATUS = {429, 500, 502, 503, 504}


# ============================================
# Requests & Results
# ============================================

class CompletionRequest(BaseModel):
    """One chat-completion call. job and key travel with the request but never hit the wire."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    model: str = Field(..., min_length=1)
    messages: List[ChatMessage]
    params: Dict[str, Any] = Field(default_factory=dict)
    job: Optional[PromptJob] = Field(default=None, exclude=True)
    key: Optional[ResponseKey] = Field(default=None, exclude=True)

    def payload(self) -> Dict[str, Any]:
        """JSON body for POST /chat/completions."""
        return {
            "model": self.model,
            "messages": [{"role": m.role.value, "content": m.content} for m in self.messages],
            **self.params,
        }


@dataclass
class Completion:
    text: str
    token_usage: Optional[Dict[str, int]] = None


# ============================================
# Live Backend
# ============================================

class _RetryableFailure(LLMError):
    """429, 5xx or a transport failure; raised inside the retry loop only."""

    def __init__(self, problem: str, status: Optional[int] = None):
        super().__init__(problem)
        self.status = status


class OpenAICompatibleBackend:
    """
    Async client for any endpoint speaking the OpenAI chat-completions protocol.

    Retries 429, 5xx and timeouts with exponential backoff and full jitter;
    401/403 fail immediately.
    """

    metered = True

    def __init__(
        self,
        api_key: Optional[str],
        base_url: str = DEFAULT_BASE_URL,
        timeout_s: float = DEFAULT_TIMEOUT_S,
        max_retries: int = DEFAULT_MAX_RETRIES,
        backoff_base_s: float = DEFAULT_BACKOFF_BASE_S,
        backoff_cap_s: float = DEFAULT_BACKOFF_CAP_S,
        transport: Optional[httpx.AsyncBaseTransport] = None,
        sleep: Callable[[float], Awaitable[None]] = asyncio.sleep,
    ):
        self.api_key = api_key
        self.base_url = base_url.rstrip("/")
        self.max_retries = max_retries
        self.backoff_base_s = backoff_base_s
        self.backoff_cap_s = backoff_cap_s
        self._sleep = sleep
        self._client = httpx.AsyncClient(timeout=timeout_s, transport=transport)

    def _retrying(self) -> AsyncRetrying:
        return AsyncRetrying(
            retry=retry_if_exception_type(_RetryableFailure),
            wait=wait_random_exponential(multiplier=self.backoff_base_s, max=self.backoff_cap_s),
            stop=stop_after_attempt(self.max_retries + 1),
            before_sleep=before_sleep_log(logger, logging.WARNING),
            sleep=self._sleep,
            reraise=True,
        )

    async def _attempt(self, url: str, headers: Dict[str, str], payload: Dict[str, Any]) -> Completion:
        try:
            response = await self._client.post(url, json=payload, headers=headers)
        except httpx.TimeoutException as e:
            raise _RetryableFailure(f"timeout: {e}") from e
        except httpx.HTTPError as e:
            raise _RetryableFailure(f"{type(e).__name__}: {e}") from e

        status = response.status_code
        if status in (401, 403):
            raise AuthError(f"Endpoint rejected the API key (HTTP {status})")
        if status in RETRYABLE_STATUS:
            raise _RetryableFailure(f"HTTP {status}", status)
        if status >= 400:
            raise TransportError(f"HTTP {status}: {response.text[:200]}")
        return self._completion(response)

    async def complete(self, req: CompletionRequest) -> Completion:
        if not self.api_key:
            raise AuthError("No API key configured (set MATCHBENCH_API_KEY)")

        url = f"{self.base_url}/chat/completions"
        headers = {"Authorization": f"Bearer {self.api_key}"}
        try:
            return await self._retrying()(self._attempt, url, headers, req.payload())
        except _RetryableFailure as e:
            if e.status == 429:
                raise RateLimitExhausted(f"Still rate limited after {self.max_retries} retries") from e
            raise TransportError(f"Giving up after {self.max_retries} retries: {e}") from e

    @staticmethod
    def _completion(response: httpx.Response) -> Completion:
        try:
            body = response.json()
            text = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise TransportError(f"Unexpected completion body: {e}") from e
        usage = body.get("usage") or None
        if usage:
            usage = {k: int(v) for k, v in usage.items() if isinstance(v, int)}
        return Completion(text=text or "", token_usage=usage)

    async def aclose(self) -> None:
        await self._client.aclose()


# ============================================
# Mock Backend
# ============================================

class MockPolicy(BaseModel):
    """
    Behaviour of the mock backend.

    oracle: answers from the ground truth; each vote flips with flip_prob and
    is left out with omit_prob. Draws depend on (seed, response key, pair) only,
    so raising flip_prob flips a superset of the pairs flipped before.
    constant: the same answer for every expected pair.
    scripted: replays the completion texts of a JSON list file in order, wrapping.
    """
    model_config = ConfigDict(frozen=True)

    mode: Literal["oracle", "constant", "scripted"] = "oracle"
    flip_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    omit_prob: float = Field(default=0.0, ge=0.0, le=1.0)
    seed: int = 0
    answer: VoteValue = VoteValue.UNKNOWN
    script: Optional[str] = None

    @field_validator("answer", mode="before")
    @classmethod
    def _casefold_answer(cls, value: Any) -> Any:
        return value.strip().lower() if isinstance(value, str) else value


def parse_policy(text: str) -> MockPolicy:
    """
    Parse a policy string:
      oracle:eps=0.1,omit=0.0,seed=7
      constant:unknown
      scripted:path/to/responses.json
    """
    mode, _, rest = text.strip().partition(":")
    mode = mode.strip().lower()
    try:
        if mode == "oracle":
            names = {"eps": "flip_prob", "flip": "flip_prob", "omit": "omit_prob", "seed": "seed"}
            values: Dict[str, Any] = {}
            for item in filter(None, (p.strip() for p in rest.split(","))):
                name, _, value = item.partition("=")
                if name.strip() not in names:
                    raise ConfigError(f"Unknown oracle parameter {name!r} in {text!r}")
                values[names[name.strip()]] = value.strip()
            return MockPolicy(mode="oracle", **values)
        if mode == "constant":
            return MockPolicy(mode="constant", answer=rest or "unknown")
        if mode == "scripted":
            if not rest:
                raise ConfigError("scripted policy needs a file path")
            return MockPolicy(mode="scripted", script=rest)
    except ValueError as e:
        raise ConfigError(f"Invalid mock policy {text!r}: {e}") from e
    raise ConfigError(f"Unknown mock policy {text!r}")


def render_answer(job: PromptJob, answers: Mapping[Pair, VoteValue]) -> str:
    """JSON payload in the job's output schema; pairs missing from answers are left out."""
    if job.scope is TaskScope.ONE_TO_ONE:
        pair = job.pairs[0]
        payload: Dict[str, Any] = {"answer": answers[pair].value} if pair in answers else {"matches": []}
    elif job.scope is TaskScope.ONE_TO_N:
        payload = {"matches": [
            {"target": t, "answer": answers[(s, t)].value} for s, t in job.pairs if (s, t) in answers
        ]}
    elif job.scope is TaskScope.N_TO_ONE:
        payload = {"matches": [
            {"source": s, "answer": answers[(s, t)].value} for s, t in job.pairs if (s, t) in answers
        ]}
    else:
        payload = {"matches": [
            {"source": s, "target": t, "answer": answers[(s, t)].value}
            for s, t in job.pairs if (s, t) in answers
        ]}
    return (
        "Lets think step by step. I compared each attribute name and description.\n\n"
        f"```json\n{json.dumps(payload, indent=2)}\n```\n"
    )


class MockBackend:
    """
    Deterministic test double; needs the ground truth for oracle mode.

    Unmetered by default: the request budget does not apply to it.
    """

    def __init__(
        self,
        policy: MockPolicy,
        truth: Optional[Mapping[str, FrozenSet[Pair]]] = None,
        metered: bool = False,
    ):
        self.policy = policy
        self.metered = metered
        self.truth = truth or {}
        self.calls = 0
        self._script: List[str] = []
        if policy.mode == "scripted":
            self._script = self._load_script(policy.script)

    @staticmethod
    def _load_script(path: Optional[str]) -> List[str]:
        try:
            texts = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise ConfigError(f"Cannot read mock script {path}: {e}") from e
        if not isinstance(texts, list) or not texts or not all(isinstance(t, str) for t in texts):
            raise ConfigError(f"Mock script {path} must be a non-empty JSON list of strings")
        return texts

    def _oracle(self, job: PromptJob, key: ResponseKey) -> Dict[Pair, VoteValue]:
        truth = self.truth.get(job.dataset_id, frozenset())
        seed = self.policy.seed
        answers = {}
        for pair in job.pairs:
            if unit_interval(seed, key.id, *pair, "omit") < self.policy.omit_prob:
                continue
            correct = pair in truth
            if unit_interval(seed, key.id, *pair, "flip") < self.policy.flip_prob:
                correct = not correct
            answers[pair] = VoteValue.YES if correct else VoteValue.NO
        return answers

    async def complete(self, req: CompletionRequest) -> Completion:
        index = self.calls
        self.calls += 1
        if self.policy.mode == "scripted":
            return Completion(text=self._script[index % len(self._script)])
        if req.job is None or req.key is None:
            raise LLMError("Mock backend needs the prompt job and response key")
        if self.policy.mode == "constant":
            answers = {p: self.policy.answer for p in req.job.pairs}
        else:
            answers = self._oracle(req.job, req.key)
        return Completion(text=render_answer(req.job, answers))

    async def aclose(self) -> None:
        return None


# ============================================
# Completion Service
# ============================================

@dataclass
class UsageStats:
    requests: int = 0
    metered_requests: int = 0
    prompt_tokens: int = 0
    completion_tokens: int = 0


class CompletionService:
    """
    At most `concurrency` requests in flight. `max_requests` caps the requests
    sent to a metered backend; unmetered backends (the mock) are never refused.
    """

    def __init__(
        self,
        backend: Any,
        concurrency: int = DEFAULT_CONCURRENCY,
        max_requests: Optional[int] = None,
    ):
        if concurrency < 1:
            raise ConfigError("concurrency must be at least 1")
        self.backend = backend
        self.max_requests = max_requests
        self.metered = bool(getattr(backend, "metered", True))
        self.usage = UsageStats()
        self._semaphore = asyncio.Semaphore(concurrency)

    @property
    def requests_issued(self) -> int:
        return self.usage.requests

    async def complete(self, req: CompletionRequest) -> Completion:
        # reserve before awaiting so concurrent callers cannot overrun the budget
        if self.metered:
            if self.max_requests is not None and self.usage.metered_requests >= self.max_requests:
                raise BudgetExceeded(f"Request budget of {self.max_requests} exhausted")
            self.usage.metered_requests += 1
        self.usage.requests += 1

        async with self._semaphore:
            completion = await self.backend.complete(req)
        if completion.token_usage:
            self.usage.prompt_tokens += completion.token_usage.get("prompt_tokens", 0)
            self.usage.completion_tokens += completion.token_usage.get("completion_tokens", 0)
        return completion

    async def aclose(self) -> None:
        await self.backend.aclose()
