"""Rank-agreement statistics and the stability-after-removal experiment.

All correlations here are computed on rank vectors (not raw depth values),
matching how depth methods are compared: two methods agree when they order
members the same way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .depth import DepthResult, depth_by_method
from .errors import ValidationError
from .grid import Ensemble


def _paired(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError("inputs must be 1D sequences of equal length")
    if x.shape[0] < 2:
        raise ValidationError("need at least two observations")
    return x, y


def pearson(x, y) -> float:
    """Product-moment correlation; errors on zero variance."""
    x, y = _paired(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sum(dx * dx))
    sy = float(np.sum(dy * dy))
    if sx == 0.0 or sy == 0.0:
        raise ValidationError("pearson undefined: an input has zero variance")
    return float(np.sum(dx * dy) / np.sqrt(sx * sy))


def kendall_tau(x, y) -> float:
    """Tie-corrected Kendall tau-b over all observation pairs."""
    x, y = _paired(x, y)
    return float(stats.kendalltau(x, y, variant="b").statistic)


@dataclass(frozen=True)
class RankScatter:
    """Per-member rank comparison table plus the two rank correlations.

    rows hold (id, rank_a, rank_b, abs_delta), sorted by abs_delta
    descending, ties by id ascending.
    """

    rows: tuple[tuple[str, int, int, int], ...]
    pearson: float
    kendall: float


def rank_scatter(a: DepthResult, b: DepthResult) -> RankScatter:
    """Join two depth results by member ID and compare their rankings."""
    if set(a.ids) != set(b.ids):
        raise ValidationError("depth results cover different member ID sets")
    rank_b = {mid: int(b.rank[j]) for j, mid in enumerate(b.ids)}
    rows = []
    for i, mid in enumerate(a.ids):
        ra = int(a.rank[i])
        rb = rank_b[mid]
        rows.append((mid, ra, rb, abs(ra - rb)))
    rows.sort(key=lambda row: (-row[3], row[0]))
    aligned_a = [row[1] for row in rows]
    aligned_b = [row[2] for row in rows]
    return RankScatter(
        rows=tuple(rows),
        pearson=pearson(aligned_a, aligned_b),
        kendall=kendall_tau(aligned_a, aligned_b),
    )


def stability_test(
    ensemble: Ensemble,
    method: str,
    k_remove: int,
    workers: int | None = None,
) -> dict:
    """Re-rank after dropping the k lowest-depth members.

    Ranks everything, removes the k_remove lowest-depth members, recomputes
    depth on the survivors, and correlates each survivor's old rank
    (compacted to 0..n-k-1, order preserved) with its new rank.
    """
    n = len(ensemble)
    if not 0 <= k_remove < n:
        raise ValidationError(
            f"k_remove {k_remove} must be below the member count {n}"
        )
    full = depth_by_method(ensemble, method, workers)
    keep = [i for i in range(n) if int(full.rank[i]) < n - k_remove]
    removed = [ensemble.ids[i] for i in range(n) if int(full.rank[i]) >= n - k_remove]
    survivors = ensemble.subset(keep)
    rerun = depth_by_method(survivors, method, workers)
    old = full.rank[keep]
    compact = np.empty(len(keep), dtype=np.int64)
    compact[np.argsort(old)] = np.arange(len(keep))
    result = {
        "method": method,
        "k_remove": k_remove,
        "removed_ids": removed,
        "pearson": pearson(compact, rerun.rank),
        "kendall": kendall_tau(compact, rerun.rank),
    }
    old_depths = full.depth[keep]
    if np.all(old_depths == old_depths[0]) and np.all(
        rerun.depth == rerun.depth[0]
    ):
        result["note"] = "degenerate: all tied"
    return result
