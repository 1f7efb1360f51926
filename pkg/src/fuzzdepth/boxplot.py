"""Contour-boxplot artifacts from an ensemble and its depth result.

A band at percentile p collects the ceil(p*N) deepest members and exports
the union and intersection of their binarized masks; the rank-0 member is
the median, the lowest-depth members are the outlier list. Bands depend
only on ranks, never on raw depth values, so any depth method plugs in.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .depth import DepthResult
from .errors import ValidationError
from .grid import BinaryMask, Ensemble, binarize

# Slice-image gray levels: band region between the envelopes, and the
# median contour drawn on top.
_BAND_GRAY = 128
_MEDIAN_GRAY = 255


@dataclass(frozen=True)
class Band:
    percentile: float
    union: BinaryMask
    intersection: BinaryMask
    member_ids: tuple[str, ...]


@dataclass(frozen=True)
class BoxplotArtifact:
    median_id: str
    bands: tuple[Band, ...]
    outlier_ids: tuple[str, ...]
    threshold: float


def build_boxplot(
    ensemble: Ensemble,
    result: DepthResult,
    percentiles: list[float],
    threshold: float = 0.5,
    outlier_count: int = 0,
) -> BoxplotArtifact:
    """Assemble median, percentile envelopes, and outliers in one member pass.

    Band p holds the k = ceil(p*N) deepest members; union is the cell-wise
    OR of their binarized masks, intersection the AND. outlier_count lowest
    -depth members become the outlier list (0 disables).
    """
    if tuple(result.ids) != tuple(ensemble.ids):
        raise ValidationError("depth result ids do not match the ensemble")
    n = len(ensemble)
    percentiles = [float(p) for p in percentiles]
    if sorted(percentiles) != percentiles:
        raise ValidationError("percentiles must be sorted ascending")
    for p in percentiles:
        if not 0.0 < p <= 1.0:
            raise ValidationError(f"percentile {p} outside (0, 1]")
    if not 0 <= outlier_count < n:
        raise ValidationError(
            f"outlier count {outlier_count} must be below the member count {n}"
        )
    cutoffs = [math.ceil(p * n) for p in percentiles]
    cells = ensemble.grid.cell_count
    unions = [np.zeros(cells, dtype=bool) for _ in percentiles]
    inters = [np.ones(cells, dtype=bool) for _ in percentiles]
    band_ids: list[list[str]] = [[] for _ in percentiles]
    for i in range(n):
        rank = int(result.rank[i])
        hit = [b for b, k in enumerate(cutoffs) if rank < k]
        if not hit:
            continue
        bits = binarize(ensemble.member(i), threshold).bits
        for b in hit:
            unions[b] |= bits
            inters[b] &= bits
            band_ids[b].append(ensemble.ids[i])
    grid = ensemble.grid
    bands = tuple(
        Band(
            percentile=p,
            union=BinaryMask(grid, unions[b]),
            intersection=BinaryMask(grid, inters[b]),
            member_ids=tuple(band_ids[b]),
        )
        for b, p in enumerate(percentiles)
    )
    ordered = result.ordered_ids()
    outliers = tuple(ordered[n - outlier_count :]) if outlier_count else ()
    return BoxplotArtifact(
        median_id=ordered[0],
        bands=bands,
        outlier_ids=outliers,
        threshold=threshold,
    )


def _slice_plane(bits: np.ndarray, dims: tuple[int, ...], axis: int, index: int) -> np.ndarray:
    plane = np.take(bits.reshape(dims), index, axis=axis)
    if plane.ndim == 1:
        plane = plane[np.newaxis, :]
    return plane


def _contour_cells(plane: np.ndarray) -> np.ndarray:
    """Cells inside the mask with at least one face neighbor outside.

    Cells beyond the image border count as outside.
    """
    edge = np.zeros_like(plane)
    for axis in range(plane.ndim):
        prev = np.zeros_like(plane)
        nxt = np.zeros_like(plane)
        head = [slice(None)] * plane.ndim
        tail = [slice(None)] * plane.ndim
        head[axis] = slice(1, None)
        tail[axis] = slice(None, -1)
        prev[tuple(head)] = plane[tuple(tail)]
        nxt[tuple(tail)] = plane[tuple(head)]
        edge |= plane & (~prev | ~nxt)
    return edge


def write_pgm(path, image: np.ndarray) -> None:
    """8-bit binary PGM (P5), row-major."""
    if image.ndim != 2 or image.dtype != np.uint8:
        raise ValidationError("PGM image must be a 2D uint8 array")
    height, width = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(image.tobytes())


def emit_slice_images(
    artifact: BoxplotArtifact,
    ensemble: Ensemble,
    axis: int,
    index: int,
    out_dir,
) -> list[str]:
    """One grayscale PGM per band: band region (union minus intersection)
    highlighted, median contour overlaid. Returns written file paths."""
    dims = ensemble.grid.dims
    if not 0 <= axis < len(dims):
        raise ValidationError(f"axis {axis} invalid for a {len(dims)}D grid")
    if not 0 <= index < dims[axis]:
        raise ValidationError(f"slice index {index} out of range for axis {axis}")
    median_pos = ensemble.ids.index(artifact.median_id)
    median_bits = binarize(ensemble.member(median_pos), artifact.threshold).bits
    median_edge = _contour_cells(_slice_plane(median_bits, dims, axis, index))
    paths = []
    for b, band in enumerate(artifact.bands):
        union = _slice_plane(band.union.bits, dims, axis, index)
        inter = _slice_plane(band.intersection.bits, dims, axis, index)
        image = np.zeros(union.shape, dtype=np.uint8)
        image[union & ~inter] = _BAND_GRAY
        image[median_edge] = _MEDIAN_GRAY
        pct = int(round(band.percentile * 100))
        path = os.path.join(str(out_dir), f"band_{b:02d}_p{pct:03d}.pgm")
        write_pgm(path, image)
        paths.append(path)
    return paths
