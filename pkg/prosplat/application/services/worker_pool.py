"""Thread pool used for row / band / depth-slice parallelism.

Work is always partitioned into disjoint output ranges and results are
gathered in submission order, so outputs do not depend on the worker count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar

from ...config.settings import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: Optional[int] = None) -> int:
    """Explicit count, else PROSPLAT_THREADS, else the CPU count.

    A positive PROSPLAT_THREADS also caps an explicit count.
    """
    configured = get_settings().threads
    if workers is not None and workers > 0:
        return min(workers, configured) if configured > 0 else workers
    if configured > 0:
        return configured
    return os.cpu_count() or 1


def split_ranges(n: int, parts: int) -> List[Tuple[int, int]]:
    """Split range(n) into at most ``parts`` contiguous, non-empty [start, stop) chunks."""
    parts = max(1, min(parts, n))
    bounds = [round(i * n / parts) for i in range(parts + 1)]
    return [(bounds[i], bounds[i + 1]) for i in range(parts) if bounds[i + 1] > bounds[i]]


class WorkerPool:
    """Ordered map over a bounded thread pool."""

    def __init__(self, workers: Optional[int] = None):
        self.workers = resolve_workers(workers)

    def map_ordered(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        if self.workers == 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=min(self.workers, len(items))) as executor:
            return list(executor.map(fn, items))

    def map_ranges(self, fn: Callable[[int, int], R], n: int) -> List[R]:
        """Apply ``fn(start, stop)`` over a partition of range(n)."""
        ranges = split_ranges(n, self.workers)
        logger.debug("Dispatching %d ranges over %d workers", len(ranges), self.workers)
        return self.map_ordered(lambda r: fn(*r), ranges)

