"""Worker-count resolution and block dispatch shared by the compute modules."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

ENV_THREADS = "TFSS_THREADS"

# Fixed block sizes: the partition never depends on the worker count, so
# results are bitwise identical for any number of workers.
COLUMN_BLOCK = 256
ROW_BLOCK = 64


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(ENV_THREADS, "").strip()
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ValueError(f"{ENV_THREADS} must be an integer, got {env!r}")
        else:
            workers = os.cpu_count() or 1
    return max(1, int(workers))


def blocks(n: int, size: int) -> list[tuple[int, int]]:
    return [(i, min(i + size, n)) for i in range(0, n, size)]


def run_blocks(fn: Callable[[int, int], None], spans: Iterable[tuple[int, int]],
               workers: int | None = None) -> None:
    """Call ``fn(start, stop)`` for every span; each call owns its output slice."""
    spans = list(spans)
    n = resolve_workers(workers)
    if n == 1 or len(spans) <= 1:
        for a, b in spans:
            fn(a, b)
        return
    with ThreadPoolExecutor(max_workers=min(n, len(spans))) as pool:
        for fut in [pool.submit(fn, a, b) for a, b in spans]:
            fut.result()
