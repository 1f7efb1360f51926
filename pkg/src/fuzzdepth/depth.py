"""Ensemble depth computation.

Three depth notions over one ensemble:

- eid: binary inclusion depth from the continuous subset operator.
- pid: exact pairwise probabilistic inclusion depth, O(N^2 * cells).
- pid-mean: linear-time variant comparing each member against the ensemble
  mean mask only; exact on the inclusion-by-mean side, approximate on the
  other, with the mass coefficient of variation as the trust diagnostic.

Plus a symmetric similarity-vs-mean baseline (fuzzy Dice / probabilistic IoU)
for ranking comparisons.

The pairwise methods assemble cross-product sums tile by tile: members are
loaded in fixed-size blocks, each block pair contributes a weighted matrix
product, and partial sums are accumulated in a fixed tile order independent
of worker count. Workers only ever compute disjoint partials, so results are
bit-identical across worker counts and repeated runs.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateEnsembleError, ValidationError
from .grid import Ensemble, ProbMask, mask_mass, mean_mask
from .inclusion import fuzzy_dice, prob_iou
from .reduction import chunk_bounds, gram_block, resolve_workers, run_tasks

# Member rows staged per tile while assembling pairwise products.
TILE_BYTES = 32 * 2**20

# pid-mean warns when the mass coefficient of variation exceeds this; above
# it the approximation error bound is too loose to trust the ranking blindly.
CV_WARN_THRESHOLD = 0.5

METHOD_NAMES = ("eid", "pid", "pid-mean", "dice", "iou")


@dataclass(frozen=True)
class DepthResult:
    """Per-member depth values and ranks for one ensemble and one method.

    rank[i] is member i's position in the descending-depth order: 0 is the
    deepest (median) member, ties broken by ascending member index.
    """

    ids: tuple[str, ...]
    in_in: np.ndarray
    in_out: np.ndarray
    depth: np.ndarray
    rank: np.ndarray
    method: str
    cv_mass: float
    elapsed_seconds: float

    def __post_init__(self) -> None:
        n = len(self.ids)
        for name in ("in_in", "in_out", "depth", "rank"):
            arr = getattr(self, name)
            if arr.shape != (n,):
                raise ValidationError(f"{name} must have one entry per member")
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.ids)

    def ordered_ids(self) -> list[str]:
        """Member ids from deepest to shallowest."""
        order = np.empty(len(self), dtype=np.int64)
        order[self.rank] = np.arange(len(self))
        return [self.ids[i] for i in order]


def ranks_from_depths(depth: np.ndarray) -> np.ndarray:
    """Dense ranks, 0 = deepest; ties broken by ascending member index."""
    order = np.argsort(-depth, kind="stable")
    rank = np.empty(depth.shape[0], dtype=np.int64)
    rank[order] = np.arange(depth.shape[0])
    return rank


def member_masses(
    ensemble: Ensemble, workers: int | None = None, require_binary: bool = False
) -> np.ndarray:
    """Weighted mass of every member, one streaming pass each."""
    eff = resolve_workers(workers)

    def one(i: int) -> float:
        mask = ensemble.member(i)
        if require_binary and not mask.is_binary():
            raise ValidationError(
                f"member {ensemble.ids[i]!r} is not binary (0/1) valued"
            )
        return mask_mass(mask)

    return np.array(run_tasks(one, range(len(ensemble)), eff), dtype=np.float64)


def mass_cv(masses: np.ndarray) -> float:
    """Population std over mean of member masses; 0 for an all-zero ensemble."""
    mean = float(np.mean(masses))
    if mean == 0.0:
        return 0.0
    return float(np.std(masses) / mean)


def _tile_size(cells: int, n: int) -> int:
    per_member = 4 * cells
    return max(1, min(n, TILE_BYTES // per_member))


def _tiles(n: int, size: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def _pairwise_sums(
    ensemble: Ensemble,
    inv_mass: np.ndarray,
    workers: int,
    complement: bool,
) -> tuple[np.ndarray, np.ndarray]:
    """Row sums and inverse-mass-weighted column sums of the pairwise matrix.

    The matrix is G[i, j] = sum_x w*u_i*u_j (or sum_x w*u_i*(1-u_j) with
    ``complement``). Returns (row_plain, col_inv) where
    row_plain[i] = sum_j G[i, j] and col_inv[j] = sum_i inv_mass[i]*G[i, j].
    The plain product is symmetric, so only upper-triangle tiles are
    computed there; the complement form needs the full tile grid.
    """
    n = len(ensemble)
    weights = ensemble.grid.weights
    tiles = _tiles(n, _tile_size(ensemble.grid.cell_count, n))
    if complement:
        pairs = [(a, b) for a in tiles for b in tiles]
    else:
        pairs = [(a, b) for ia, a in enumerate(tiles) for b in tiles[ia:]]

    def task(pair: tuple[tuple[int, int], tuple[int, int]]) -> np.ndarray:
        (il, ih), (jl, jh) = pair
        rows = ensemble.block_values(il, ih)
        cols = rows if (jl, jh) == (il, ih) else ensemble.block_values(jl, jh)
        return gram_block(rows, cols, weights, complement_cols=complement)

    row_plain = np.zeros(n, dtype=np.float64)
    col_inv = np.zeros(n, dtype=np.float64)
    blocks = run_tasks(task, pairs, workers)
    # Accumulate partials in listed tile order; worker scheduling cannot
    # change the result because every block is computed independently.
    for ((il, ih), (jl, jh)), g in zip(pairs, blocks):
        row_plain[il:ih] += g.sum(axis=1)
        col_inv[jl:jh] += inv_mass[il:ih] @ g
        if not complement and (il, ih) != (jl, jh):
            row_plain[jl:jh] += g.sum(axis=0)
            col_inv[il:ih] += g @ inv_mass[jl:jh]
    return row_plain, col_inv


def _inverse_masses(masses: np.ndarray) -> np.ndarray:
    inv = np.zeros_like(masses)
    pos = masses > 0.0
    inv[pos] = 1.0 / masses[pos]
    return inv


def _result(
    ensemble: Ensemble,
    in_in: np.ndarray,
    in_out: np.ndarray,
    method: str,
    cv: float,
    t0: float,
) -> DepthResult:
    depth = np.minimum(in_in, in_out)
    return DepthResult(
        ids=ensemble.ids,
        in_in=in_in,
        in_out=in_out,
        depth=depth,
        rank=ranks_from_depths(depth),
        method=method,
        cv_mass=cv,
        elapsed_seconds=time.perf_counter() - t0,
    )


def depth_eid(ensemble: Ensemble, workers: int | None = None) -> DepthResult:
    """Inclusion depth for binary ensembles (members must be 0/1 valued).

    in_in[i] averages (c_i subset-of c_j) over all j including i, in_out[i]
    averages the reverse direction; depth is their minimum. The subset score
    is 1 - |C_i \\ C_j| / |C_i|, assembled from set-difference products.
    """
    t0 = time.perf_counter()
    eff = resolve_workers(workers)
    n = len(ensemble)
    masses = member_masses(ensemble, eff, require_binary=True)
    inv = _inverse_masses(masses)
    row_excess, col_inv = _pairwise_sums(ensemble, inv, eff, complement=True)
    pos = masses > 0.0
    n_pos = float(np.count_nonzero(pos))
    in_in = np.zeros(n, dtype=np.float64)
    in_in[pos] = (n - inv[pos] * row_excess[pos]) / n
    in_out = (n_pos - col_inv) / n
    return _result(ensemble, in_in, in_out, "eid", mass_cv(masses), t0)


def depth_pid(ensemble: Ensemble, workers: int | None = None) -> DepthResult:
    """Exact probabilistic inclusion depth via all member pairs.

    in_in[i] averages prob_inclusion(u_i, u_j) over all j including i;
    in_out[i] averages prob_inclusion(u_j, u_i). Zero-mass members carry
    depth 0 by the zero-mass convention.
    """
    t0 = time.perf_counter()
    eff = resolve_workers(workers)
    n = len(ensemble)
    masses = member_masses(ensemble, eff)
    inv = _inverse_masses(masses)
    row_plain, col_inv = _pairwise_sums(ensemble, inv, eff, complement=False)
    in_in = inv * row_plain / n
    in_out = col_inv / n
    return _result(ensemble, in_in, in_out, "pid", mass_cv(masses), t0)


def _member_mean_terms(
    values: np.ndarray, mean_values: np.ndarray, weights: np.ndarray | None
) -> tuple[float, float]:
    """Fused sums (w*u*mean, w*u) for one member against the mean mask."""
    num = 0.0
    mass = 0.0
    for lo, hi in chunk_bounds(values.shape[0]):
        uc = values[lo:hi].astype(np.float64, copy=False)
        if weights is not None:
            uc = uc * weights[lo:hi]
        num += float(np.sum(uc * mean_values[lo:hi]))
        mass += float(np.sum(uc))
    return num, mass


def depth_pid_mean(
    ensemble: Ensemble,
    workers: int | None = None,
    cv_warn_threshold: float = CV_WARN_THRESHOLD,
) -> DepthResult:
    """Linear-time inclusion depth against the ensemble mean mask.

    in_in[i] = prob_inclusion(u_i, mean) equals the exact pairwise in_in by
    linearity of the inclusion operator in its second argument; in_out[i] =
    prob_inclusion(mean, u_i) is an approximation whose error grows with the
    mass coefficient of variation (reported as cv_mass, warned above the
    threshold). One mean pass plus one pass per member; peak residency is
    the mean mask plus a single member.
    """
    t0 = time.perf_counter()
    eff = resolve_workers(workers)
    n = len(ensemble)
    mean = mean_mask(ensemble)
    mean_mass_total = mask_mass(mean)
    if mean_mass_total == 0.0:
        raise DegenerateEnsembleError("ensemble mean mask is identically zero")
    weights = ensemble.grid.weights
    mean64 = mean.values64()

    def one(i: int) -> tuple[float, float]:
        return _member_mean_terms(ensemble.member(i).values, mean64, weights)

    terms = run_tasks(one, range(n), eff)
    num = np.array([t[0] for t in terms], dtype=np.float64)
    masses = np.array([t[1] for t in terms], dtype=np.float64)
    inv = _inverse_masses(masses)
    in_in = num * inv
    in_out = num / mean_mass_total
    cv = mass_cv(masses)
    if cv > cv_warn_threshold:
        warnings.warn(
            f"member mass CV {cv:.3g} exceeds {cv_warn_threshold:g}; "
            "pid-mean ranks may diverge from exact pid",
            RuntimeWarning,
            stacklevel=2,
        )
    return _result(ensemble, in_in, in_out, "pid-mean", cv, t0)


_BASELINES: dict[str, Callable[[ProbMask, ProbMask], float]] = {
    "dice": fuzzy_dice,
    "fuzzy-dice": fuzzy_dice,
    "iou": prob_iou,
    "prob-iou": prob_iou,
}


def depth_similarity_baseline(
    ensemble: Ensemble, measure: str, workers: int | None = None
) -> DepthResult:
    """Depth as symmetric similarity of each member to the mean mask.

    measure is "dice"/"fuzzy-dice" or "iou"/"prob-iou". The two choices rank
    identically (monotone relation); values differ.
    """
    try:
        fn = _BASELINES[measure]
    except KeyError:
        raise ValidationError(
            f"unknown similarity measure {measure!r}; "
            f"expected one of {sorted(_BASELINES)}"
        ) from None
    t0 = time.perf_counter()
    eff = resolve_workers(workers)
    mean = mean_mask(ensemble)
    if mask_mass(mean) == 0.0:
        raise DegenerateEnsembleError("ensemble mean mask is identically zero")
    masses = member_masses(ensemble, eff)

    def one(i: int) -> float:
        return fn(ensemble.member(i), mean)

    depth = np.array(run_tasks(one, range(len(ensemble)), eff), dtype=np.float64)
    method = "dice" if fn is fuzzy_dice else "iou"
    return _result(ensemble, depth, depth.copy(), method, mass_cv(masses), t0)


def compare_pid_vs_mean(
    ensemble: Ensemble, workers: int | None = None
) -> dict[str, float]:
    """Exact pid vs pid-mean: per-member depth error and rank agreement."""
    if len(ensemble) < 2:
        raise ValidationError("comparison needs at least two members")
    # Imported here: consistency depends on this module for depth methods.
    from .consistency import kendall_tau, pearson

    exact = depth_pid(ensemble, workers)
    approx = depth_pid_mean(ensemble, workers)
    err = np.abs(exact.depth - approx.depth)
    return {
        "max_abs_error": float(err.max()),
        "mean_abs_error": float(err.mean()),
        "rank_pearson": pearson(exact.rank, approx.rank),
        "rank_kendall": kendall_tau(exact.rank, approx.rank),
        "cv_mass": approx.cv_mass,
    }


def depth_by_method(
    ensemble: Ensemble, method: str, workers: int | None = None
) -> DepthResult:
    """Dispatch on a method name from METHOD_NAMES."""
    if method == "eid":
        return depth_eid(ensemble, workers)
    if method == "pid":
        return depth_pid(ensemble, workers)
    if method == "pid-mean":
        return depth_pid_mean(ensemble, workers)
    if method in _BASELINES:
        return depth_similarity_baseline(ensemble, method, workers)
    raise ValidationError(
        f"unknown depth method {method!r}; expected one of {METHOD_NAMES}"
    )
