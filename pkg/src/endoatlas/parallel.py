"""Ordered parallel map.  Results come back in input order regardless of the
number of workers, so downstream merges are deterministic."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

from .config import get_config


def ordered_map(fn, items, workers=None):
    items = list(items)
    workers = get_config().workers if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def chunk_ranges(total, size):
    return [(i, min(i + size, total)) for i in range(0, total, size)]
