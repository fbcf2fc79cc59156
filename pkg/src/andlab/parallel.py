"""Order-preserving worker pool for independent Monte Carlo trials.

Results come back in submission order whatever the scheduling, so any
aggregation over the returned list is reproducible for every worker
count.  Worker callables must be picklable (module-level functions,
optionally wrapped in functools.partial over picklable context).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor


def map_indexed(func, items, workers: int = 1, chunksize: int | None = None) -> list:
    """Apply func to each item, in order, optionally across processes."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    if chunksize is None:
        chunksize = max(1, len(items) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items, chunksize=chunksize))
