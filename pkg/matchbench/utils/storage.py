"""
matchbench - Storage Utilities
Report file output.
"""

from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from ..core.errors import StorageError
from .helpers import sanitize_filename
from .logging_utils import get_logger

logger = get_logger("storage")


class ReportStorage:
    """
    Writes report tables as CSV (machine readable) and Markdown (for reading).
    Used by the evaluate, combine, baseline and report commands.
    """

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)

    def _path(self, name: str, suffix: str) -> Path:
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise StorageError(f"Cannot create report directory {self.out_dir}: {e}") from e
        return self.out_dir / f"{sanitize_filename(name)}{suffix}"

    def write_csv(self, name: str, frame: pd.DataFrame) -> Path:
        path = self._path(name, ".csv")
        try:
            frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n")
        except OSError as e:
            raise StorageError(f"Cannot write {path}: {e}") from e
        return path

    def write_markdown(self, name: str, frame: pd.DataFrame, title: Optional[str] = None) -> Path:
        path = self._path(name, ".md")
        content = frame.to_markdown(index=False, floatfmt=".3f")
        if title:
            content = f"# {title}\n\n{content}"
        try:
            path.write_text(content + "\n", encoding="utf-8")
        except OSError as e:
            raise StorageError(f"Cannot write {path}: {e}") from e
        return path

    def write_table(
        self,
        name: str,
        frame: pd.DataFrame,
        display: Optional[pd.DataFrame] = None,
        title: Optional[str] = None,
    ) -> List[Path]:
        """CSV of `frame` plus Markdown of `display` (defaults to frame)."""
        paths = [
            self.write_csv(name, frame),
            self.write_markdown(name, frame if display is None else display, title),
        ]
        logger.info("Wrote %s", ", ".join(str(p) for p in paths))
        return paths

