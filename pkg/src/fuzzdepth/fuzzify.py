"""Probabilistic masks from raw scalar fields.

Two modelings of a field's isocontour coexist here: the sublevel set
{f < q} as a hard mask, and a fuzzy band peaking at f == q with a linear
falloff of the given width. They are different objects (half-space vs band)
and are never asserted equal. Density-like fields can instead be normalized
into [0, 1] directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import BinaryMask, GridSpec, ProbMask

# Fraction of the field's value range used as falloff width when none given.
DEFAULT_WIDTH_FRACTION = 0.05


@dataclass(frozen=True)
class ScalarField:
    """Unbounded per-cell scalar values on a grid; NaN/Inf rejected."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape == self.grid.dims:
            values = values.reshape(-1)
        if values.shape != (self.grid.cell_count,):
            raise ValidationError(
                f"field has {values.size} cells, grid expects {self.grid.cell_count}"
            )
        if values.dtype not in (np.float32, np.float64):
            values = values.astype(np.float64)
        if not np.all(np.isfinite(values)):
            raise ValidationError("field values must be finite")
        values = np.ascontiguousarray(values)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


def hard_isocontour(field: ScalarField, q: float) -> BinaryMask:
    """Sublevel-set mask {f < q}, strict inequality."""
    return BinaryMask(field.grid, field.values < q)


def default_width(field: ScalarField) -> float:
    """Falloff width as a fixed fraction of the field's value range."""
    span = float(field.values.max()) - float(field.values.min())
    if span == 0.0:
        raise ValidationError("constant field has no usable value range")
    return DEFAULT_WIDTH_FRACTION * span


def fuzzy_isocontour(field: ScalarField, q: float, width: float) -> ProbMask:
    """Band mask peaking where f == q: u = max(0, 1 - |f - q| / width)."""
    if not width > 0.0:
        raise ValidationError(f"falloff width must be positive, got {width}")
    u = 1.0 - np.abs(field.values.astype(np.float64, copy=False) - q) / width
    np.maximum(u, 0.0, out=u)
    return ProbMask(field.grid, u.astype(np.float32))


def normalize_density(field: ScalarField, mode: str = "minmax") -> ProbMask:
    """Map a nonnegative-density-like field into [0, 1].

    minmax: (f - min) / (max - min), errors on constant fields.
    scale-by-max: clamp(f / max, 0, 1), errors unless max > 0.
    """
    values = field.values.astype(np.float64, copy=False)
    if mode == "minmax":
        low = float(values.min())
        high = float(values.max())
        if high == low:
            raise ValidationError("constant field cannot be minmax-normalized")
        u = (values - low) / (high - low)
    elif mode == "scale-by-max":
        high = float(values.max())
        if not high > 0.0:
            raise ValidationError(
                f"scale-by-max needs a positive maximum, got {high}"
            )
        u = np.clip(values / high, 0.0, 1.0)
    else:
        raise ValidationError(
            f"unknown normalization mode {mode!r}; "
            "expected 'minmax' or 'scale-by-max'"
        )
    return ProbMask(field.grid, u.astype(np.float32))
