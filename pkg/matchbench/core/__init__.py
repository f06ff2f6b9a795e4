"""
matchbench - Core Package

Algorithms live in the submodules (similarity, prompting, parsing,
llm_client); only the exception hierarchy is re-exported here.
"""

from .errors import (
    AuthError,
    BenchmarkError,
    BudgetExceeded,
    ConfigError,
    DatasetMismatch,
    DegenerateInput,
    EmptyTruth,
    EvaluationError,
    InsufficientRuns,
    LLMError,
    MalformedJson,
    ManifestNotFound,
    MatchbenchError,
    NoJsonFound,
    ParseError,
    RateLimitExhausted,
    RunCountMismatch,
    SchemaError,
    SimilarityError,
    StorageError,
    StoreCorrupt,
    TemplateError,
    TransportError,
    TruthError,
    UnknownMetric,
)

__all__ = [
    "AuthError",
    "BenchmarkError",
    "BudgetExceeded",
    "ConfigError",
    "DatasetMismatch",
    "DegenerateInput",
    "EmptyTruth",
    "EvaluationError",
    "InsufficientRuns",
    "LLMError",
    "MalformedJson",
    "ManifestNotFound",
    "MatchbenchError",
    "NoJsonFound",
    "ParseError",
    "RateLimitExhausted",
    "RunCountMismatch",
    "SchemaError",
    "SimilarityError",
    "StorageError",
    "StoreCorrupt",
    "TemplateError",
    "TransportError",
    "TruthError",
    "UnknownMetric",
]
