"""Core domain types: grids, masks, and ensembles.

A grid fixes the cell layout (row-major over ``dims``) and optional per-cell
quadrature weights. Masks store one value per cell in flat order. Mask arrays
are frozen after validation so instances can be shared across threads.

Storage dtype policy: masks default to float32 to halve memory, but float64
input arrays keep their precision (ensemble means and file round-trips need
it). Every reduction accumulates in float64 regardless of storage dtype.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .errors import (
    DegenerateEnsembleError,
    GridMismatchError,
    ValidationError,
)
from .reduction import weighted_sum

# Values this far outside [0, 1] are treated as rounding noise and clamped.
VALUE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GridSpec:
    """Cell layout shared by all masks of an ensemble.

    dims is the grid shape, e.g. (256, 256) or (50, 50, 50). weights holds
    one positive cell volume per cell in row-major flat order; None means the
    uniform unit-weight grid.
    """

    dims: tuple[int, ...]
    weights: np.ndarray | None = None

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if len(dims) == 0 or any(d < 1 for d in dims):
            raise ValidationError(f"grid dims must be positive, got {self.dims}")
        object.__setattr__(self, "dims", dims)
        if self.weights is not None:
            w = np.ascontiguousarray(self.weights, dtype=np.float64)
            if w.shape != (self.cell_count,):
                raise ValidationError(
                    f"weights shape {w.shape} does not match "
                    f"cell count {self.cell_count}"
                )
            if not np.all(np.isfinite(w)) or np.any(w <= 0.0):
                raise ValidationError("cell weights must be finite and positive")
            w.flags.writeable = False
            object.__setattr__(self, "weights", w)

    @property
    def cell_count(self) -> int:
        n = 1
        for d in self.dims:
            n *= d
        return n

    def compatible_with(self, other: "GridSpec") -> bool:
        if self.dims != other.dims:
            return False
        if (self.weights is None) != (other.weights is None):
            return False
        if self.weights is not None:
            return bool(np.array_equal(self.weights, other.weights))
        return True

    def require_same(self, other: "GridSpec") -> None:
        if not self.compatible_with(other):
            raise GridMismatchError(
                f"grids differ: dims {self.dims} vs {other.dims} "
                f"(or weight arrays differ)"
            )


def _freeze(values: np.ndarray) -> np.ndarray:
    values.flags.writeable = False
    return values


@dataclass(frozen=True)
class ProbMask:
    """Per-cell membership values in [0, 1] on a fixed grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape == self.grid.dims:
            values = values.reshape(-1)
        if values.shape != (self.grid.cell_count,):
            raise ValidationError(
                f"mask has {values.size} cells, grid expects {self.grid.cell_count}"
            )
        if values.dtype != np.float64:
            values = values.astype(np.float32)
        if not np.all(np.isfinite(values)):
            raise ValidationError("mask values must be finite")
        low = float(values.min())
        high = float(values.max())
        if low < -VALUE_TOLERANCE or high > 1.0 + VALUE_TOLERANCE:
            raise ValidationError(
                f"mask values outside [0, 1]: min={low!r} max={high!r}"
            )
        if low < 0.0 or high > 1.0:
            values = np.clip(values, 0.0, 1.0)
        values = np.ascontiguousarray(values)
        object.__setattr__(self, "values", _freeze(values))

    @property
    def dtype(self) -> np.dtype:
        return self.values.dtype

    def values64(self) -> np.ndarray:
        return self.values.astype(np.float64, copy=False)

    def is_binary(self) -> bool:
        v = self.values
        return bool(np.all((v == 0.0) | (v == 1.0)))


@dataclass(frozen=True)
class BinaryMask:
    """Hard indicator mask: cell is inside (True) or outside (False)."""

    grid: GridSpec
    bits: np.ndarray

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits)
        if bits.shape == self.grid.dims:
            bits = bits.reshape(-1)
        if bits.shape != (self.grid.cell_count,):
            raise ValidationError(
                f"mask has {bits.size} cells, grid expects {self.grid.cell_count}"
            )
        if bits.dtype != np.bool_:
            if not np.all((bits == 0) | (bits == 1)):
                raise ValidationError("binary mask values must be 0 or 1")
            bits = bits.astype(np.bool_)
        bits = np.ascontiguousarray(bits)
        object.__setattr__(self, "bits", _freeze(bits))

    def to_prob(self) -> ProbMask:
        return ProbMask(self.grid, self.bits.astype(np.float32))


MaskLoader = Callable[[], ProbMask]


class Ensemble:
    """Ordered collection of probabilistic masks on one shared grid.

    Members are either materialized ProbMask instances or zero-argument
    loaders resolved on access, which lets large on-disk ensembles stream
    through depth computations with only a couple of members resident.
    """

    def __init__(
        self,
        grid: GridSpec,
        members: Sequence[ProbMask | MaskLoader],
        ids: Sequence[str] | None = None,
    ) -> None:
        if len(members) == 0:
            raise DegenerateEnsembleError("ensemble needs at least one member")
        if ids is None:
            ids = [f"member_{i:04d}" for i in range(len(members))]
        ids = tuple(str(s) for s in ids)
        if len(ids) != len(members):
            raise ValidationError(
                f"{len(ids)} ids for {len(members)} members"
            )
        if len(set(ids)) != len(ids):
            raise ValidationError("member ids must be unique")
        sources: list[ProbMask | MaskLoader] = []
        for m in members:
            if isinstance(m, ProbMask):
                grid.require_same(m.grid)
            sources.append(m)
        self.grid = grid
        self.ids = ids
        self._sources = sources

    def __len__(self) -> int:
        return len(self._sources)

    def member(self, i: int) -> ProbMask:
        src = self._sources[i]
        if isinstance(src, ProbMask):
            return src
        mask = src()
        self.grid.require_same(mask.grid)
        return mask

    def __iter__(self) -> Iterator[ProbMask]:
        for i in range(len(self)):
            yield self.member(i)

    def is_lazy(self) -> bool:
        return any(not isinstance(s, ProbMask) for s in self._sources)

    def block_values(self, lo: int, hi: int) -> np.ndarray:
        """Stack members lo..hi-1 into a (hi-lo, cells) array, storage dtype."""
        return np.stack([self.member(i).values for i in range(lo, hi)])

    def materialize(self) -> "Ensemble":
        if not self.is_lazy():
            return self
        return Ensemble(self.grid, [self.member(i) for i in range(len(self))], self.ids)

    def map_members(self, fn: Callable[[ProbMask], ProbMask]) -> "Ensemble":
        """Lazily apply fn to every member, preserving streaming access."""

        def make_loader(i: int) -> MaskLoader:
            return lambda: fn(self.member(i))

        sources: list[ProbMask | MaskLoader] = []
        for i, src in enumerate(self._sources):
            if isinstance(src, ProbMask):
                sources.append(fn(src))
            else:
                sources.append(make_loader(i))
        return Ensemble(self.grid, sources, self.ids)

    def subset(self, indices: Sequence[int]) -> "Ensemble":
        return Ensemble(
            self.grid,
            [self._sources[i] for i in indices],
            [self.ids[i] for i in indices],
        )


def mask_mass(mask: ProbMask) -> float:
    """Weighted total membership of a mask: sum over cells of w * u."""
    return weighted_sum(mask.values, mask.grid.weights)


def binary_mass(mask: BinaryMask) -> float:
    return weighted_sum(mask.bits.astype(np.float32), mask.grid.weights)


def mean_mask(ensemble: Ensemble) -> ProbMask:
    """Cell-wise ensemble mean, accumulated sequentially in float64.

    One streaming pass in member order; peak residency is the accumulator
    plus a single member.
    """
    acc = np.zeros(ensemble.grid.cell_count, dtype=np.float64)
    for mask in ensemble:
        acc += mask.values
    acc /= len(ensemble)
    return ProbMask(ensemble.grid, acc)


def binarize(mask: ProbMask, threshold: float) -> BinaryMask:
    """Hard mask {u >= t} for a threshold t in (0, 1]."""
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold}")
    return BinaryMask(mask.grid, mask.values >= threshold)


def binarize_ensemble(ensemble: Ensemble, threshold: float) -> Ensemble:
    """Binarize every member, keeping lazy members lazy."""
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold}")
    return ensemble.map_members(
        lambda m: binarize(m, threshold).to_prob()
    )


def permute_cells(ensemble: Ensemble, perm: np.ndarray) -> Ensemble:
    """Relabel cells of every member (and the weights) by one bijection.

    Depths are invariant under this because they only ever sum over cells.
    """
    perm = np.asarray(perm)
    n = ensemble.grid.cell_count
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ValidationError("perm must be a bijection over cell indices")
    weights = ensemble.grid.weights
    flat = GridSpec(
        (n,), None if weights is None else weights[perm]
    )
    members = [
        ProbMask(flat, ensemble.member(i).values[perm]) for i in range(len(ensemble))
    ]
    return Ensemble(flat, members, ensemble.ids)
