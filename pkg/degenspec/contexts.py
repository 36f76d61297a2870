import logging
import time
from typing import Dict, Optional

from degenspec.errors import StageError

LOGGER = logging.getLogger(__name__)


class Stage:
    """
    Times one pipeline stage. Exceptions leaving the block come out as `StageError`.
    """

    __slots__ = ("name", "_timings", "_start")

    def __init__(self, name: str, timings: Optional[Dict[str, float]] = None):
        self.name = name
        self._timings = timings
        self._start = 0.0

    def __enter__(self):
        LOGGER.info("stage %s started", self.name)
        self._start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self._start
        if self._timings is not None:
            self._timings[self.name] = self._timings.get(self.name, 0.0) + elapsed
        if exc is None:
            LOGGER.info("stage %s finished in %.3fs", self.name, elapsed)
            return False
        if isinstance(exc, StageError) or not isinstance(exc, Exception):
            return False
        LOGGER.warning("stage %s failed after %.3fs: %s", self.name, elapsed, exc)
        raise StageError(self.name, exc) from exc
