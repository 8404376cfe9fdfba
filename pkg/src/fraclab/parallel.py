"""Thread budget resolution and a deterministic shard map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

from .errors import DomainError

ENV_THREADS = "FRACLAB_THREADS"


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(ENV_THREADS)
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise DomainError(f"{ENV_THREADS}={env!r} is not an integer") from None
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise DomainError("thread count must be positive")
    return threads


def shard_map(fn, shards, threads: int):
    """``[fn(s) for s in shards]`` in order, possibly run on a thread pool."""
    shards = list(shards)
    if threads <= 1 or len(shards) <= 1:
        return [fn(s) for s in shards]
    with ThreadPoolExecutor(max_workers=min(threads, len(shards))) as pool:
        return list(pool.map(fn, shards))
