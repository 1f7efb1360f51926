"""Deterministic cell reductions shared by every depth computation.

All sums over grid cells go through this module so that results are
bit-reproducible: cells are processed in fixed-size chunks, each chunk is
reduced with numpy's pairwise summation, and chunk totals are accumulated in
ascending chunk order. Worker count never changes the arithmetic; parallelism
only ever distributes whole, independent tasks.

Accumulation is always float64 regardless of the storage dtype of the inputs.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Iterator, Sequence, TypeVar

import numpy as np

# Cells per reduction chunk. Keeps per-chunk rounding error bounded while the
# chunk is still large enough for BLAS-backed block products.
CHUNK_CELLS = 65536

WORKERS_ENV_VAR = "FUZZDEPTH_WORKERS"

T = TypeVar("T")
R = TypeVar("R")


def chunk_bounds(n_cells: int) -> Iterator[tuple[int, int]]:
    """Yield (start, stop) index pairs covering [0, n_cells) in ascending order."""
    for start in range(0, n_cells, CHUNK_CELLS):
        yield start, min(start + CHUNK_CELLS, n_cells)


def weighted_sum(values: np.ndarray, weights: np.ndarray | None = None) -> float:
    """Sum of w*v over all cells; w defaults to ones."""
    total = 0.0
    for lo, hi in chunk_bounds(values.shape[0]):
        chunk = values[lo:hi].astype(np.float64, copy=False)
        if weights is not None:
            chunk = chunk * weights[lo:hi]
        total += float(np.sum(chunk))
    return total


def weighted_inner(
    a: np.ndarray, b: np.ndarray, weights: np.ndarray | None = None
) -> float:
    """Sum of w*a*b over all cells in one fused pass."""
    total = 0.0
    for lo, hi in chunk_bounds(a.shape[0]):
        chunk = a[lo:hi].astype(np.float64, copy=False) * b[lo:hi]
        if weights is not None:
            chunk *= weights[lo:hi]
        total += float(np.sum(chunk))
    return total


def weighted_excess(
    a: np.ndarray, b: np.ndarray, weights: np.ndarray | None = None
) -> float:
    """Sum of w*a*(1-b): the mass of a lying outside the support of b."""
    total = 0.0
    for lo, hi in chunk_bounds(a.shape[0]):
        chunk = a[lo:hi].astype(np.float64, copy=False) * (
            1.0 - b[lo:hi].astype(np.float64, copy=False)
        )
        if weights is not None:
            chunk *= weights[lo:hi]
        total += float(np.sum(chunk))
    return total


def gram_block(
    rows: np.ndarray,
    cols: np.ndarray,
    weights: np.ndarray | None = None,
    complement_cols: bool = False,
) -> np.ndarray:
    """Cross-products rows . diag(w) . cols^T, accumulated chunk by chunk.

    rows and cols are (n, cells) arrays of any float dtype; the result is
    float64 of shape (n_rows, n_cols). With ``complement_cols`` the column
    side enters as (1 - cols), which is the set-difference form used by the
    binary subset operator.
    """
    out = np.zeros((rows.shape[0], cols.shape[0]), dtype=np.float64)
    for lo, hi in chunk_bounds(rows.shape[1]):
        left = rows[:, lo:hi].astype(np.float64, copy=False)
        if weights is not None:
            left = left * weights[lo:hi]
        right = cols[:, lo:hi].astype(np.float64, copy=False)
        if complement_cols:
            right = 1.0 - right
        out += left @ right.T
    return out


def resolve_workers(workers: int | None = None) -> int:
    """Effective worker count: explicit arg, else env override, else all cores."""
    if workers is not None:
        if workers < 1:
            raise ValueError("workers must be >= 1")
        return int(workers)
    env = os.environ.get(WORKERS_ENV_VAR)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass  # unusable override, fall through to the hardware default
    return os.cpu_count() or 1


def run_tasks(
    fn: Callable[[T], R], items: Sequence[T] | Iterable[T], workers: int
) -> list[R]:
    """Apply fn to every item, preserving input order in the result list.

    Each call must be independent; scheduling order is unspecified, so
    determinism of the combined result follows from task independence.
    """
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
