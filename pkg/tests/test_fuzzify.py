from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fuzzdepth import (
    GridSpec,
    ScalarField,
    ValidationError,
    default_width,
    fuzzy_isocontour,
    hard_isocontour,
    normalize_density,
)


def _field(values):
    values = np.asarray(values, dtype=np.float64)
    return ScalarField(GridSpec(values.shape), values)


class TestScalarField:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValidationError):
            _field([0.0, np.nan])
        with pytest.raises(ValidationError):
            _field([0.0, np.inf])

    def test_integer_input_promoted(self):
        f = ScalarField(GridSpec((3,)), np.array([1, 2, 3], dtype=np.int32))
        assert f.values.dtype == np.float64

    def test_shape_checked(self):
        with pytest.raises(ValidationError):
            ScalarField(GridSpec((4,)), np.zeros(5))


def test_hard_isocontour_is_strict_sublevel():
    bits = hard_isocontour(_field([0.0, 1.0, 2.0, 3.0]), 2.0).bits
    np.testing.assert_array_equal(bits, [True, True, False, False])


def test_default_width_is_range_fraction():
    assert default_width(_field([0.0, 10.0, 4.0])) == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        default_width(_field([3.0, 3.0]))


class TestFuzzyIsocontour:
    def test_hand_values(self):
        u = fuzzy_isocontour(_field([0.0, 1.0, 2.0, 3.0]), 1.0, 2.0)
        np.testing.assert_allclose(u.values, [0.5, 1.0, 0.5, 0.0], atol=1e-7)

    def test_width_must_be_positive(self):
        with pytest.raises(ValidationError):
            fuzzy_isocontour(_field([0.0, 1.0]), 0.5, 0.0)
        with pytest.raises(ValidationError):
            fuzzy_isocontour(_field([0.0, 1.0]), 0.5, -1.0)

    @given(
        f=arrays(np.float64, 16, elements=st.floats(-100, 100)),
        q=st.floats(-100, 100),
        width=st.floats(0.1, 50),
    )
    def test_range_peak_and_monotone_falloff(self, f, q, width):
        u = fuzzy_isocontour(_field(f), q, width).values64()
        assert u.min() >= 0.0 and u.max() <= 1.0
        dist = np.abs(f - q)
        # cells sitting exactly on the level get full membership
        assert np.all(u[dist == 0.0] == 1.0)
        # farther from the level never means more membership
        order = np.argsort(dist)
        assert np.all(np.diff(u[order]) <= 1e-6)


class TestNormalizeDensity:
    def test_minmax(self):
        u = normalize_density(_field([2.0, 4.0, 6.0]), "minmax")
        np.testing.assert_allclose(u.values, [0.0, 0.5, 1.0], atol=1e-7)
        with pytest.raises(ValidationError):
            normalize_density(_field([1.0, 1.0]), "minmax")

    def test_scale_by_max(self):
        u = normalize_density(_field([2.0, 4.0, 6.0]), "scale-by-max")
        np.testing.assert_allclose(u.values, [1 / 3, 2 / 3, 1.0], atol=1e-7)
        with pytest.raises(ValidationError):
            normalize_density(_field([0.0, 0.0]), "scale-by-max")
        with pytest.raises(ValidationError):
            normalize_density(_field([-1.0, -2.0]), "scale-by-max")

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            normalize_density(_field([0.0, 1.0]), "zscore")
