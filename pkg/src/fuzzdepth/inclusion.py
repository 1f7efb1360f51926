"""Pairwise mask operators.

Directional probabilistic inclusion, its binary specialization, and the two
symmetric similarity baselines (fuzzy Dice, probabilistic IoU). All operators
work on weighted or uniform grids and compute numerator and denominator in a
single fused pass over cells, since the workload is bandwidth-bound.

Conventions: inclusion of a zero-mass mask in anything is 0. The symmetric
similarities instead reject the all-zero/all-zero pair, which has no
meaningful value.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .grid import BinaryMask, ProbMask
from .reduction import chunk_bounds


def prob_inclusion(u: ProbMask, v: ProbMask) -> float:
    """Directional overlap (sum of w*u*v) / (sum of w*u), in [0, 1].

    The expectation of v under the probability measure induced by u.
    Returns 0 when u has zero mass.
    """
    u.grid.require_same(v.grid)
    weights = u.grid.weights
    num = 0.0
    den = 0.0
    for lo, hi in chunk_bounds(u.grid.cell_count):
        uc = u.values[lo:hi].astype(np.float64, copy=False)
        if weights is not None:
            uc = uc * weights[lo:hi]
        num += float(np.sum(uc * v.values[lo:hi]))
        den += float(np.sum(uc))
    if den == 0.0:
        return 0.0
    return num / den


def subset_epsilon(a: BinaryMask, b: BinaryMask) -> float:
    """Continuous subset operator 1 - |A\\B| / |A|; 0 when |A| = 0.

    Coincides with prob_inclusion on the indicator masks.
    """
    a.grid.require_same(b.grid)
    weights = a.grid.weights
    excess = 0.0
    mass = 0.0
    for lo, hi in chunk_bounds(a.grid.cell_count):
        ac = a.bits[lo:hi]
        out = ac & ~b.bits[lo:hi]
        if weights is not None:
            wc = weights[lo:hi]
            excess += float(np.sum(wc * out))
            mass += float(np.sum(wc * ac))
        else:
            excess += float(np.count_nonzero(out))
            mass += float(np.count_nonzero(ac))
    if mass == 0.0:
        return 0.0
    return 1.0 - excess / mass


def _min_max_terms(u: ProbMask, v: ProbMask) -> tuple[float, float, float, float]:
    """Fused weighted sums of min(u,v), max(u,v), u, and v."""
    u.grid.require_same(v.grid)
    weights = u.grid.weights
    s_min = s_max = s_u = s_v = 0.0
    for lo, hi in chunk_bounds(u.grid.cell_count):
        uc = u.values[lo:hi].astype(np.float64, copy=False)
        vc = v.values[lo:hi].astype(np.float64, copy=False)
        lo_uv = np.minimum(uc, vc)
        hi_uv = np.maximum(uc, vc)
        if weights is not None:
            wc = weights[lo:hi]
            s_min += float(np.sum(wc * lo_uv))
            s_max += float(np.sum(wc * hi_uv))
            s_u += float(np.sum(wc * uc))
            s_v += float(np.sum(wc * vc))
        else:
            s_min += float(np.sum(lo_uv))
            s_max += float(np.sum(hi_uv))
            s_u += float(np.sum(uc))
            s_v += float(np.sum(vc))
    return s_min, s_max, s_u, s_v


def fuzzy_dice(u: ProbMask, v: ProbMask) -> float:
    """Soft Dice overlap 2*sum(w*min(u,v)) / (sum(w*u) + sum(w*v)); symmetric."""
    s_min, _, s_u, s_v = _min_max_terms(u, v)
    if s_u + s_v == 0.0:
        raise ValidationError("fuzzy_dice is undefined for two zero-mass masks")
    return 2.0 * s_min / (s_u + s_v)


def prob_iou(u: ProbMask, v: ProbMask) -> float:
    """Soft Jaccard overlap sum(w*min(u,v)) / sum(w*max(u,v)); symmetric.

    Related to fuzzy_dice by iou == dice / (2 - dice).
    """
    s_min, s_max, _, _ = _min_max_terms(u, v)
    if s_max == 0.0:
        raise ValidationError("prob_iou is undefined for two zero-mass masks")
    return s_min / s_max
