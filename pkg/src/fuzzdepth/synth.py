"""Synthetic ensemble generators for tests, experiments, and benchmarks.

Every generator is a pure function of (seed, parameters): each member draws
from its own counter-based random stream keyed by (seed, member index), so
ensembles are reproducible across runs and platforms and members could be
generated in any order or in parallel without changing a single byte.

Geometry uses cell-index coordinates: the cell at flat position (i, j[, k])
sits at the point (i, j[, k]) in R^d.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .grid import Ensemble, GridSpec, ProbMask


def member_rng(seed: int, index: int) -> np.random.Generator:
    """Independent per-member stream; Philox keys make streams collision-free."""
    return np.random.Generator(np.random.Philox(key=[np.uint64(seed), np.uint64(index)]))


def _cell_coords(dims: tuple[int, ...]) -> list[np.ndarray]:
    """Per-axis coordinate arrays broadcastable to the full grid."""
    return list(np.ogrid[tuple(slice(0, d) for d in dims)])


def gen_fuzzy_disk(
    grid2d: GridSpec,
    center: tuple[float, float],
    radius: float,
    sigma2: float,
) -> ProbMask:
    """Disk with hard interior and Gaussian falloff of variance sigma2 outside.

    u = 1 for dist <= radius, exp(-(dist - radius)^2 / (2*sigma2)) beyond.
    """
    if len(grid2d.dims) != 2:
        raise ValidationError("gen_fuzzy_disk needs a 2D grid")
    if not radius > 0.0 or not sigma2 > 0.0:
        raise ValidationError("radius and sigma2 must be positive")
    yy, xx = _cell_coords(grid2d.dims)
    dist = np.sqrt((yy - center[0]) ** 2 + (xx - center[1]) ** 2)
    u = np.where(
        dist <= radius,
        1.0,
        np.exp(-((dist - radius) ** 2) / (2.0 * sigma2)),
    )
    return ProbMask(grid2d, u.astype(np.float32))


def gen_disk_ensemble(
    res: int,
    n: int,
    seed: int,
    *,
    radius_fraction: float = 0.30,
    radius_sd: float = 0.05,
    center_sd_fraction: float = 0.01,
    sigma2: float = 0.8,
) -> Ensemble:
    """Fuzzy disks with jittered centers and radii on a res x res grid.

    Radii are radius_fraction*res scaled per member by Normal(1, radius_sd^2);
    centers jitter around the grid center by Normal(0, (center_sd_fraction*res)^2)
    per axis.
    """
    if res < 8 or n < 1:
        raise ValidationError("need res >= 8 and n >= 1")
    grid = GridSpec((res, res))
    base_center = ((res - 1) / 2.0, (res - 1) / 2.0)
    base_radius = radius_fraction * res
    members = []
    for i in range(n):
        rng = member_rng(seed, i)
        radius = base_radius * rng.normal(1.0, radius_sd)
        cy, cx = base_center + rng.normal(0.0, center_sd_fraction * res, size=2)
        members.append(gen_fuzzy_disk(grid, (cy, cx), max(radius, 1.0), sigma2))
    return Ensemble(grid, members, [f"disk_{i:04d}" for i in range(n)])


def gen_ellipsoid_ensemble(
    res: int,
    n_base: int,
    n_outliers: int,
    seed: int,
    *,
    axes_fractions: tuple[float, float, float] = (0.30, 0.25, 0.20),
    axis_jitter_sd: float = 0.10,
    center_sd_fraction: float = 0.01,
    falloff_fraction: float = 0.02,
    outlier_scales: tuple[float, ...] = (1.0,),
    outlier_offset_fraction: float = 0.25,
) -> Ensemble:
    """Fuzzy 3D ellipsoids with controlled outlier contamination.

    Base members: semi-axes axes_fractions*res scaled per axis by
    Normal(1, axis_jitter_sd^2), center jittered per axis by
    Normal(0, (center_sd_fraction*res)^2), Gaussian boundary falloff of
    sigma = falloff_fraction*res. Outliers follow the same recipe with the
    semi-axes additionally multiplied by one factor picked uniformly from
    outlier_scales and the center shifted by outlier_offset_fraction*res
    along a random signed axis. Base members come first, outliers after.
    """
    if res < 8:
        raise ValidationError("need res >= 8")
    if n_base < 0 or n_outliers < 0 or n_base + n_outliers < 1:
        raise ValidationError("need n_base, n_outliers >= 0 and at least one member")
    grid = GridSpec((res, res, res))
    coords = _cell_coords(grid.dims)
    sigma = falloff_fraction * res
    base_axes = np.array(axes_fractions, dtype=np.float64) * res
    grid_center = np.full(3, (res - 1) / 2.0)
    members = []
    ids = []
    n_total = n_base + n_outliers
    for i in range(n_total):
        rng = member_rng(seed, i)
        is_outlier = i >= n_base
        axes = base_axes * rng.normal(1.0, axis_jitter_sd, size=3)
        center = grid_center + rng.normal(0.0, center_sd_fraction * res, size=3)
        if is_outlier:
            axes = axes * outlier_scales[int(rng.integers(len(outlier_scales)))]
            axis = int(rng.integers(3))
            sign = 1.0 if rng.integers(2) else -1.0
            center = center.copy()
            center[axis] += sign * outlier_offset_fraction * res
        members.append(_fuzzy_ellipsoid(grid, coords, center, axes, sigma))
        if is_outlier:
            ids.append(f"outlier_{i - n_base:04d}")
        else:
            ids.append(f"base_{i:04d}")
    return Ensemble(grid, members, ids)


def _fuzzy_ellipsoid(
    grid: GridSpec,
    coords: list[np.ndarray],
    center: np.ndarray,
    axes: np.ndarray,
    sigma: float,
) -> ProbMask:
    """Unit interior, Gaussian falloff over the radial distance to the shell.

    For a cell at Euclidean distance r from the center with normalized
    ellipsoid radius rho, the shell lies at r/rho along the same ray, so the
    outside falloff uses d = r*(1 - 1/rho).
    """
    rho2 = np.zeros(grid.dims, dtype=np.float64)
    r2 = np.zeros(grid.dims, dtype=np.float64)
    for d in range(3):
        delta = coords[d] - center[d]
        rho2 = rho2 + (delta / axes[d]) ** 2
        r2 = r2 + delta**2
    rho = np.sqrt(rho2)
    outside = rho > 1.0
    u = np.ones(grid.dims, dtype=np.float64)
    dist = np.sqrt(r2[outside]) * (1.0 - 1.0 / rho[outside])
    u[outside] = np.exp(-(dist**2) / (2.0 * sigma * sigma))
    return ProbMask(grid, u.astype(np.float32))


def gen_contour_ensemble_2d(
    n: int,
    res: int,
    seed: int,
    *,
    radius_fraction: float = 0.35,
    amplitude_fraction: float = 0.03,
    orders: int = 5,
    outlier_prob: float = 0.2,
    outlier_amp_factor: float = 3.0,
) -> Ensemble:
    """Filled closed contours: a circle radius-modulated by a random Fourier series.

    The boundary radius is R(theta) = radius_fraction*res plus orders sine
    and cosine terms with Normal(0, (amplitude_fraction*res)^2) amplitudes.
    With probability outlier_prob a member's amplitudes triple (shape
    outlier). Members are binary-valued masks (cells with r <= R(theta)).
    """
    if res < 8 or n < 1:
        raise ValidationError("need res >= 8 and n >= 1")
    grid = GridSpec((res, res))
    yy, xx = _cell_coords(grid.dims)
    cy = cx = (res - 1) / 2.0
    r = np.sqrt((yy - cy) ** 2 + (xx - cx) ** 2)
    theta = np.arctan2(xx - cx, yy - cy)
    base_radius = radius_fraction * res
    amp_sd = amplitude_fraction * res
    # Radius floor keeps every contour nonempty even for extreme draws.
    radius_floor = 0.02 * res
    k_theta = [k * theta for k in range(1, orders + 1)]
    members = []
    for i in range(n):
        rng = member_rng(seed, i)
        is_outlier = rng.uniform() < outlier_prob
        amp_cos = rng.normal(0.0, amp_sd, size=orders)
        amp_sin = rng.normal(0.0, amp_sd, size=orders)
        if is_outlier:
            amp_cos = amp_cos * outlier_amp_factor
            amp_sin = amp_sin * outlier_amp_factor
        radius = np.full(grid.dims, base_radius)
        for k in range(orders):
            radius = radius + amp_cos[k] * np.cos(k_theta[k])
            radius = radius + amp_sin[k] * np.sin(k_theta[k])
        np.maximum(radius, radius_floor, out=radius)
        members.append(ProbMask(grid, (r <= radius).astype(np.float32)))
    return Ensemble(grid, members, [f"contour_{i:04d}" for i in range(n)])
