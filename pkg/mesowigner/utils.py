from __future__ import annotations

import logging
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

from .conf import settings
from .exceptions import SampleFailure

__all__ = ["SampleExecutor"]

logger = logging.getLogger(__name__)

T = TypeVar("T")


class SampleExecutor:
    """Run per-sample work in a bounded pool of in-process worker threads.

    Results are always returned in sample-index order, so any reduction over
    them is independent of the number of workers and of scheduling. NumPy and
    LAPACK release the GIL, so threads scale for the dense linear algebra
    that dominates a sample.

    With one worker everything runs in the calling thread.
    """

    def __init__(self, max_workers: int | None = None, name: str = "mesowigner"):
        max_workers = settings.WORKERS if max_workers is None else int(max_workers)
        if max_workers < 1:
            raise ValueError("SampleExecutor max_workers must be at least 1")
        self.max_workers = max_workers
        self.name = name
        self._executor: ThreadPoolExecutor | None = None

    def __enter__(self) -> SampleExecutor:
        if self.max_workers > 1:
            self._executor = ThreadPoolExecutor(max_workers=self.max_workers, thread_name_prefix=self.name)
        return self

    def __exit__(self, *exc_info):
        self.shutdown()

    def shutdown(self):
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    def map_samples(self, fn: Callable[[int], T], indices: Iterable[int], seed: int = 0) -> list[T]:
        """Apply ``fn`` to every sample index and return results in index order.

        :raises SampleFailure: for the lowest failing sample index, wrapping
            the original exception.
        """
        indices = sorted(indices)
        if self._executor is None:
            results = []
            for index in indices:
                results.append(self._call(fn, index, seed))
            return results
        futures = [self._executor.submit(self._call, fn, index, seed) for index in indices]
        try:
            return [future.result() for future in futures]
        except SampleFailure:
            for future in futures:
                future.cancel()
            raise

    @staticmethod
    def _call(fn: Callable[[int], T], index: int, seed: int) -> T:
        try:
            return fn(index)
        except SampleFailure:
            raise
        except Exception as exc:
            logger.error("Sample %d (seed %d) failed: %s", index, seed, exc)
            raise SampleFailure(seed, index, exc) from exc
