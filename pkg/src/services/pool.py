"""
Worker pool management.
Runs independent fitting jobs (ensemble members, per-symbol baselines)
concurrently while keeping results in submission order.
"""

import threading
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Optional, TypeVar

from src.config import settings
from src.utils.logger import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class WorkerPool:
    """Thread pool whose results never depend on the worker count."""

    def __init__(self, max_workers: Optional[int] = None):
        """
        Initialize worker pool.

        Args:
            max_workers: Thread count (defaults to settings.default_threads)
        """
        self.max_workers = max(1, max_workers or settings.default_threads)
        self._executor: Optional[ThreadPoolExecutor] = None
        self._lock = threading.Lock()
        self._jobs_done = 0

    def _ensure_executor(self) -> ThreadPoolExecutor:
        with self._lock:
            if self._executor is None:
                self._executor = ThreadPoolExecutor(
                    max_workers=self.max_workers, thread_name_prefix="etf-monitor"
                )
                logger.debug(f"Started worker pool ({self.max_workers} threads)")
            return self._executor

    def map_ordered(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """
        Apply fn to every item and return results in input order.

        With a single worker the jobs run inline. The first job error is
        re-raised after all submitted jobs have settled.
        """
        items = list(items)
        if self.max_workers == 1 or len(items) <= 1:
            results = [fn(item) for item in items]
            self._jobs_done += len(items)
            return results

        executor = self._ensure_executor()
        futures: Dict[int, Future] = {i: executor.submit(fn, item) for i, item in enumerate(items)}

        results: List[R] = []
        first_error: Optional[BaseException] = None
        for i in range(len(items)):
            try:
                results.append(futures[i].result())
            except Exception as e:
                if first_error is None:
                    first_error = e
                logger.error(f"Worker job {i} failed: {e}")

        if first_error is not None:
            raise first_error

        self._jobs_done += len(items)
        return results

    def shutdown(self) -> None:
        """Stop the worker threads."""
        with self._lock:
            if self._executor is not None:
                self._executor.shutdown(wait=True)
                self._executor = None
                logger.debug(f"Worker pool shut down after {self._jobs_done} jobs")

    @property
    def jobs_done(self) -> int:
        """Number of completed jobs."""
        return self._jobs_done

    def __enter__(self) -> "WorkerPool":
        return self

    def __exit__(self, *exc: object) -> None:
        self.shutdown()
