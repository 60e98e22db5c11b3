"""Deterministic fan-out: results always come back in submission order."""

from __future__ import annotations

import os
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor

THREADS_ENV = "ISINGBELL_THREADS"


def default_threads() -> int:
    value = os.environ.get(THREADS_ENV)
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    return 1


def map_ordered(fn: Callable, items: Sequence, threads: int | None = None) -> list:
    """Apply fn to each item, possibly on a thread pool, preserving order.

    Each call is independent, so the result list is identical whatever the
    worker count; threads only change wall time.
    """
    items = list(items)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
