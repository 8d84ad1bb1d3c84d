"""Ordered thread-pool map capped by ``DISLOC_THREADS``.

Results always come back in input order so reductions stay deterministic.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count() -> int:
    raw = os.environ.get("DISLOC_THREADS", "")
    try:
        n = int(raw) if raw else (os.cpu_count() or 1)
    except ValueError:
        raise ValueError(f"DISLOC_THREADS must be an integer, got {raw!r}") from None
    return max(1, n)


def parallel_map(fn, items) -> list:
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
