"""Deterministic fan-out for independent tasks.

Results always come back in task order, so reductions do not depend on the
number of workers. ``GWD_THREADS`` caps the worker count (default 1).
"""

import os
from concurrent.futures import ThreadPoolExecutor


def thread_count(threads=None):
    if threads is None:
        threads = int(os.environ.get("GWD_THREADS", "1") or 1)
    return max(1, int(threads))


def parallel_map(fn, items, threads=None):
    items = list(items)
    n = thread_count(threads)
    if n == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
