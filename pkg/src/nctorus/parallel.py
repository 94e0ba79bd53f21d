"""Order-preserving parallel map capped by ``NC_TORUS_THREADS``."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

ENV_VAR = "NC_TORUS_THREADS"


def worker_count() -> int:
    raw = os.environ.get(ENV_VAR)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1


def pmap(func, items, workers: int | None = None) -> list:
    """``[func(x) for x in items]``, spread over processes when more than one worker is allowed."""
    items = list(items)
    workers = worker_count() if workers is None else workers
    workers = min(workers, len(items))
    if workers <= 1:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
