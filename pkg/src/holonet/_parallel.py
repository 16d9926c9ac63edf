import os
from concurrent.futures import ThreadPoolExecutor


def worker_count():
    """Worker cap from ``HOLONET_THREADS`` (default: CPU count, at most 8)."""
    raw = os.environ.get("HOLONET_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"HOLONET_THREADS must be an integer, got {raw!r}") from None
    return max(1, min(8, os.cpu_count() or 1))


def map_ordered(fn, items):
    """``list(map(fn, items))`` spread over a thread pool; order is preserved."""
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
