"""Deterministic chunked reductions, optionally spread over threads.

Worker count is capped by the ``ORDCALC_THREADS`` environment variable.
Results are always combined in chunk order, so sums are bit-for-bit
reproducible regardless of the number of workers.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    raw = os.environ.get("ORDCALC_THREADS")
    cpus = os.cpu_count() or 1
    if raw is None:
        return cpus
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, min(n, cpus))


def ordered_sum(fn, chunks):
    """Return ``sum(fn(c) for c in chunks)`` with a fixed left-to-right reduction."""
    chunks = list(chunks)
    workers = min(worker_count(), len(chunks))
    if workers <= 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, chunks))
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total
