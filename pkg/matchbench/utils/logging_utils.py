"""
matchbench - Logging Utilities
Coloured console logging for the matchbench.* logger namespace.
"""

import logging
import sys
from contextlib import contextmanager
from typing import Iterator

ROOT_LOGGER = "matchbench"


class ColoredFormatter(logging.Formatter):
    """Custom formatter with colors for different log levels."""

    COLORS = {
        'DEBUG': '\033[36m',     # Cyan
        'INFO': '\033[32m',      # Green
        'WARNING': '\033[33m',   # Yellow
        'ERROR': '\033[31m',     # Red
        'CRITICAL': '\033[35m',  # Magenta
    }
    RESET = '\033[0m'

    def __init__(self, fmt: str, datefmt: str, use_color: bool = True):
        super().__init__(fmt, datefmt)
        self.use_color = use_color

    def format(self, record):
        message = super().format(record)
        if not self.use_color:
            return message
        color = self.COLORS.get(record.levelname, self.RESET)
        return f"{color}{message}{self.RESET}"


class MatchbenchFilter(logging.Filter):
    def filter(self, record):
        return record.name.startswith(ROOT_LOGGER)


def get_logger(name: str) -> logging.Logger:
    """Logger under the matchbench namespace, e.g. get_logger("llm") -> matchbench.llm."""
    if name.startswith(ROOT_LOGGER):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


@contextmanager
def enable_logging(level: int = logging.INFO) -> Iterator[logging.Logger]:
    """Attach a stderr handler to the matchbench logger for the duration of a command."""
    parent_logger = logging.getLogger(ROOT_LOGGER)

    old_level = parent_logger.level
    old_handlers = parent_logger.handlers.copy()
    old_propagate = parent_logger.propagate

    parent_logger.setLevel(level)
    parent_logger.handlers.clear()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColoredFormatter(
        "%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%H:%M:%S",
        use_color=sys.stderr.isatty(),
    ))
    handler.addFilter(MatchbenchFilter())
    parent_logger.addHandler(handler)
    parent_logger.propagate = False

    try:
        yield parent_logger
    finally:
        parent_logger.setLevel(old_level)
        parent_logger.handlers.clear()
        for h in old_handlers:
            parent_logger.addHandler(h)
        parent_logger.propagate = old_propagate
