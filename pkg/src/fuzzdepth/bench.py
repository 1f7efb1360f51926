"""Scaling benchmarks over ensemble size or grid resolution.

Each configuration generates a synthetic ellipsoid ensemble once (outside
the timed region), runs one untimed warm-up, then reports the median of the
timed repeats. Sizes sweep in ascending order; one ensemble is resident at
a time.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from .depth import TILE_BYTES, depth_by_method
from .errors import ValidationError
from .synth import gen_ellipsoid_ensemble

BENCH_MODES = ("ensemble-size", "resolution")


@dataclass(frozen=True)
class BenchRow:
    method: str
    n: int
    res: int
    seconds: float
    peak_mem_estimate: int


def estimate_peak_bytes(method: str, n: int, cells: int) -> int:
    """Rough resident-set model: materialized masks plus the working set."""
    masks = n * cells * 4
    tile = min(TILE_BYTES, masks)
    tile_members = max(1, tile // (cells * 4))
    if method in ("pid", "eid"):
        working = 2 * tile + 8 * tile_members * tile_members
    else:
        # Mean-based methods keep the float64 mean plus one member.
        working = 8 * cells + 4 * cells
    return masks + working


def run_bench(
    mode: str,
    methods: list[str],
    sizes: list[int],
    *,
    res: int = 50,
    n: int = 200,
    seed: int = 0,
    repeats: int = 3,
    workers: int | None = None,
) -> list[BenchRow]:
    if mode not in BENCH_MODES:
        raise ValidationError(f"unknown bench mode {mode!r}; expected {BENCH_MODES}")
    if not methods or not sizes:
        raise ValidationError("need at least one method and one size")
    if repeats < 1:
        raise ValidationError("repeats must be >= 1")
    rows = []
    for size in sorted(sizes):
        if mode == "ensemble-size":
            n_cur, res_cur = size, res
        else:
            n_cur, res_cur = n, size
        ensemble = gen_ellipsoid_ensemble(res_cur, n_cur, 0, seed)
        for method in methods:
            depth_by_method(ensemble, method, workers)
            times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                depth_by_method(ensemble, method, workers)
                times.append(time.perf_counter() - t0)
            rows.append(
                BenchRow(
                    method=method,
                    n=n_cur,
                    res=res_cur,
                    seconds=statistics.median(times),
                    peak_mem_estimate=estimate_peak_bytes(
                        method, n_cur, ensemble.grid.cell_count
                    ),
                )
            )
        del ensemble
    return rows


def write_bench_csv(rows: list[BenchRow], path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "n", "res", "seconds", "peak_mem_estimate"])
        for row in rows:
            writer.writerow(
                [row.method, row.n, row.res, repr(row.seconds), row.peak_mem_estimate]
            )
