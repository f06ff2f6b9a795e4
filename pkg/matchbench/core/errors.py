"""
matchbench - Exceptions
One hierarchy for every module; the CLI maps MatchbenchError to exit code 1.
"""


class MatchbenchError(Exception):
    """Base exception for all harness errors."""
    pass


class ConfigError(MatchbenchError):
    """Invalid configuration value or combination."""
    pass


# ============================================
# Benchmark
# ============================================

class BenchmarkError(MatchbenchError):
    """Base exception for benchmark manifest errors."""
    pass


class ManifestNotFound(BenchmarkError):
    """Manifest path does not exist or holds no benchmark.json."""
    pass


class SchemaError(BenchmarkError):
    """Malformed schema: empty, duplicate or missing attributes."""
    pass


class TruthError(BenchmarkError):
    """Ground truth references an unknown dataset or attribute."""
    pass


# ============================================
# Similarity
# ============================================

class SimilarityError(MatchbenchError):
    """Base exception for the string-similarity baseline."""
    pass


class UnknownMetric(SimilarityError):
    """Metric identifier is not one of the supported metrics."""
    pass


class DegenerateInput(SimilarityError):
    """Both gram sets are empty."""
    pass


class EmptyTruth(SimilarityError):
    """Threshold selection needs at least one true match."""
    pass


# ============================================
# Prompting
# ============================================

class TemplateError(MatchbenchError):
    """Prompt template is missing a required placeholder or names an unknown one."""
    pass


# ============================================
# LLM Backends
# ============================================

class LLMError(MatchbenchError):
    """Base exception for completion backends."""
    pass


class AuthError(LLMError):
    """Endpoint rejected the credentials (401/403)."""
    pass


class RateLimitExhausted(LLMError):
    """Still rate limited after the configured number of retries."""
    pass


class TransportError(LLMError):
    """Network failure or unexpected response from the endpoint."""
    pass


class BudgetExceeded(LLMError):
    """The configured maximum number of requests has been issued."""
    pass


class StorageError(MatchbenchError):
    """A file under the runs or reports directory cannot be read or written."""
    pass


class StoreCorrupt(StorageError):
    """A response store file failed its format or checksum check."""
    pass


# ============================================
# Parsing
# ============================================

class ParseError(MatchbenchError):
    """Base exception for JSON extraction from completions."""
    pass


class NoJsonFound(ParseError):
    """The completion contains no JSON candidate at all."""
    pass


class MalformedJson(ParseError):
    """JSON candidates were found but none of them parse."""
    pass


# ============================================
# Evaluation
# ============================================

class EvaluationError(MatchbenchError):
    """Base exception for metric computation."""
    pass


class DatasetMismatch(EvaluationError):
    """Matching, ground truth or records belong to different datasets."""
    pass


class InsufficientRuns(EvaluationError):
    """Consistency needs at least two runs per dataset."""
    pass


class RunCountMismatch(EvaluationError):
    """Methods being combined have different run counts on a dataset."""
    pass
