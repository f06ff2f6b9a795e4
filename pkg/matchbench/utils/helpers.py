"""
matchbench - Utility Helpers
Common utility functions.
"""

import hashlib
import re
from datetime import datetime, timezone


def sanitize_filename(name: str) -> str:
    """Sanitize a string for use as a single path segment."""
    # Remove invalid characters, including path separators
    name = re.sub(r'[<>:"/\\|?*\x00-\x1f]', '_', name.strip())
    # Replace spaces with underscores
    name = name.replace(' ', '_')
    if name in {"", ".", ".."}:
        name = name.replace(".", "_") or "_"
    # Limit length
    return name[:100]


def format_duration(milliseconds: float) -> str:
    """Format milliseconds to human readable duration."""
    if milliseconds < 1000:
        return f"{milliseconds:.0f}ms"

    seconds = milliseconds / 1000
    if seconds < 60:
        return f"{seconds:.1f}s"

    minutes = seconds / 60
    if minutes < 60:
        return f"{minutes:.1f}min"

    hours = minutes / 60
    return f"{hours:.1f}hr"


def utc_timestamp() -> str:
    """Current UTC time as ISO 8601."""
    return datetime.now(timezone.utc).isoformat()


def sha256_hex(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def unit_interval(*parts: object) -> float:
    """Deterministic pseudo-random number in [0, 1) derived from the parts."""
    digest = hashlib.sha256("|".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") / 2 ** 64
