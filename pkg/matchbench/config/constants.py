"""
matchbench - Constants and Defaults
All default values and constants for the harness.
"""

# Manifest
MANIFEST_FILENAME = "benchmark.json"
NO_DESCRIPTION = "(no description)"

# LLM Defaults
DEFAULT_MODEL = "gpt-3.5-turbo-0125"
DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_TIMEOUT_S = 120.0
DEFAULT_MAX_RETRIES = 6
DEFAULT_BACKOFF_BASE_S = 1.0
DEFAULT_BACKOFF_CAP_S = 60.0
DEFAULT_CONCURRENCY = 4
DEFAULT_MAX_REQUESTS = 2000  # live requests per suite invocation

# Experiment Protocol
DEFAULT_RUNS = 5
DEFAULT_VOTES = 3
DEFAULT_SCOPES = ["1-to-N", "N-to-1"]

# Baseline
DEFAULT_METRIC = "ngram"
BASELINE_MODEL = "baseline"
NGRAM_PAD_START = "##"
NGRAM_PAD_END = "%%"
JARO_WINKLER_PREFIX_WEIGHT = 0.1

# Storage
DEFAULT_RUNS_DIR = "runs"
DEFAULT_REPORTS_DIR = "reports"
DEFAULT_CONFIG_FILE = "matchbench.json"
