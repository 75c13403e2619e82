"""Ordered chunked work distribution.

Work over ``range(total)`` is cut into fixed-size chunks whose boundaries do
not depend on the worker count; results come back in chunk order. Combined
with per-index random substreams this makes every output independent of
``workers``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")

DEFAULT_CHUNK = 256


def chunks(total: int, chunk_size: int = DEFAULT_CHUNK) -> list[range]:
    if chunk_size < 1:
        raise ValueError("chunk_size must be >= 1")
    return [range(s, min(s + chunk_size, total)) for s in range(0, total, chunk_size)]


def ordered_map(
    fn: Callable[[range], T], total: int, workers: int = 1, chunk_size: int = DEFAULT_CHUNK
) -> list[T]:
    """Apply ``fn`` to consecutive index ranges and return results in order."""
    parts = chunks(total, chunk_size)
    if workers <= 1 or len(parts) <= 1:
        return [fn(r) for r in parts]
    # the compiled kernels release the GIL, so threads give real overlap
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, parts))
