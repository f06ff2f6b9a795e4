"""
matchbench - Utils Package
"""

from .helpers import (
    format_duration,
    sanitize_filename,
    sha256_hex,
    unit_interval,
    utc_timestamp,
)
from .logging_utils import enable_logging, get_logger

__all__ = [
    "format_duration",
    "sanitize_filename",
    "sha256_hex",
    "unit_interval",
    "utc_timestamp",
    "enable_logging",
    "get_logger",
]
