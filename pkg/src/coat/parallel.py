"""Seed derivation and order-preserving parallel map."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np


def rng_for(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator determined only by (seed, *keys)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, keys)]))


def derive_seed(seed: int, *keys: int) -> int:
    """A 32-bit integer seed determined only by (seed, *keys)."""
    ss = np.random.SeedSequence([int(seed), *map(int, keys)])
    return int(ss.generate_state(1)[0])


def default_threads() -> int:
    value = os.environ.get("COAT_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def map_ordered(fn, items, threads: int | None = None) -> list:
    """``[fn(x) for x in items]``, optionally on a thread pool.

    Output order follows ``items`` regardless of scheduling, so results are
    identical for any thread count.
    """
    items = list(items)
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
