"""
matchbench - Models Package
"""

from .schemas import (
    Attribute,
    Benchmark,
    ChatMessage,
    Dataset,
    GroundTruth,
    MessageRole,
    Pair,
    ResponseKey,
    Schema,
    TaskScope,
    VoteValue,
)
from .results import ExperimentRecord, Matching
from .benchmark import (
    DatasetSummary,
    Diagnostic,
    dump_benchmark,
    import_benchmark,
    load_benchmark,
    pair_space,
    read_benchmark,
    summarize,
    validate_benchmark,
)

__all__ = [
    "Attribute",
    "Benchmark",
    "ChatMessage",
    "MessageRole",
    "Dataset",
    "GroundTruth",
    "Pair",
    "ResponseKey",
    "Schema",
    "TaskScope",
    "VoteValue",
    "ExperimentRecord",
    "Matching",
    "DatasetSummary",
    "Diagnostic",
    "dump_benchmark",
    "import_benchmark",
    "load_benchmark",
    "pair_space",
    "read_benchmark",
    "summarize",
    "validate_benchmark",
]
