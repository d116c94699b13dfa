"""Small shared helpers: worker pools and exact row normalization."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_THREADS_ENV = "MD_THREADS"


def worker_count() -> int:
    """Worker cap for embarrassingly parallel loops, from MD_THREADS."""
    raw = os.environ.get(_THREADS_ENV, "")
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        value = min(4, os.cpu_count() or 1)
    return value


def thread_map(fn, items):
    """Map preserving input order; results are independent of worker count."""
    items = list(items)
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def normalize_row_exact(weights: np.ndarray) -> np.ndarray:
    """Scale positive weights to sum to exactly 1.0 under left-to-right addition.

    The last entry is set to 1 minus the running sum of the others, so a
    sequential accumulation in storage order (the order sparse matvec uses)
    reproduces 1.0 bit-for-bit. Constant fields are then preserved exactly.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.size == 0:
        raise ValueError("cannot normalize an empty weight row")
    if np.any(w <= 0):
        raise ValueError("row weights must be positive")
    w = w / w.sum()
    partial = 0.0
    for value in w[:-1]:
        partial += float(value)
    last = 1.0 - partial
    if last <= 0.0:
        raise ValueError("row normalization produced a nonpositive trailing weight")
    w[-1] = last
    return w
