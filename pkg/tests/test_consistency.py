from __future__ import annotations

import numpy as np
import pytest

from fuzzdepth import (
    DepthResult,
    Ensemble,
    GridSpec,
    ProbMask,
    ValidationError,
    depth_pid,
    depth_pid_mean,
    kendall_tau,
    pearson,
    rank_scatter,
    stability_test,
)

from conftest import make_binary_ensemble


class TestPearson:
    def test_hand_values(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0, abs=1e-14)
        assert pearson([1, 2, 3], [6, 4, 2]) == pytest.approx(-1.0, abs=1e-14)
        assert pearson([0, 1, 2], [1, 0, 2]) == pytest.approx(0.5, abs=1e-14)

    def test_zero_variance_rejected(self):
        with pytest.raises(ValidationError):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(ValidationError):
            pearson([1, 2, 3], [5, 5, 5])

    def test_shape_checks(self):
        with pytest.raises(ValidationError):
            pearson([1, 2], [1, 2, 3])
        with pytest.raises(ValidationError):
            pearson([1], [2])


class TestKendall:
    def test_hand_values(self):
        assert kendall_tau([1, 2, 3], [1, 3, 2]) == pytest.approx(1 / 3, abs=1e-12)
        assert kendall_tau([0, 1, 2, 3], [0, 1, 2, 3]) == pytest.approx(1.0)
        assert kendall_tau([0, 1, 2, 3], [3, 2, 1, 0]) == pytest.approx(-1.0)

    def test_handles_ties(self):
        # tau-b corrects the denominator for tied pairs
        v = kendall_tau([1, 1, 2], [1, 2, 3])
        assert v == pytest.approx(np.sqrt(2 / 3), abs=1e-12)


def _fake_result(ids, ranks):
    n = len(ids)
    depth = np.array([(n - r) / n for r in ranks], dtype=np.float64)
    return DepthResult(
        ids=tuple(ids),
        in_in=depth.copy(),
        in_out=depth.copy(),
        depth=depth,
        rank=np.asarray(ranks, dtype=np.int64),
        method="pid",
        cv_mass=0.0,
        elapsed_seconds=0.0,
    )


class TestRankScatter:
    def test_hand_join(self):
        a = _fake_result(["a", "b", "c"], [0, 1, 2])
        b = _fake_result(["c", "a", "b"], [2, 1, 0])  # a->1, b->0, c->2
        sc = rank_scatter(a, b)
        assert sc.rows == (("a", 0, 1, 1), ("b", 1, 0, 1), ("c", 2, 2, 0))
        assert sc.pearson == pytest.approx(0.5, abs=1e-14)
        assert sc.kendall == pytest.approx(1 / 3, abs=1e-12)

    def test_join_is_by_id_not_position(self):
        a = _fake_result(["a", "b"], [0, 1])
        b = _fake_result(["b", "a"], [1, 0])  # same ranking, listed reversed
        sc = rank_scatter(a, b)
        assert sc.pearson == pytest.approx(1.0)
        assert all(row[3] == 0 for row in sc.rows)

    def test_id_mismatch_rejected(self):
        a = _fake_result(["a", "b"], [0, 1])
        b = _fake_result(["a", "x"], [0, 1])
        with pytest.raises(ValidationError):
            rank_scatter(a, b)

    def test_methods_agree_on_trio(self, nested_trio):
        sc = rank_scatter(depth_pid(nested_trio), depth_pid_mean(nested_trio))
        assert sc.pearson == pytest.approx(1.0, abs=1e-14)
        assert sc.kendall == pytest.approx(1.0, abs=1e-14)


class TestStability:
    def test_removing_nothing_changes_nothing(self):
        e = make_binary_ensemble(17, 12, (6, 6))
        rep = stability_test(e, "eid", 0)
        assert rep["removed_ids"] == []
        assert rep["pearson"] == pytest.approx(1.0, abs=1e-14)
        assert rep["kendall"] == pytest.approx(1.0, abs=1e-14)
        assert rep["method"] == "eid"
        assert rep["k_remove"] == 0

    def test_trio_removal_freezes_tie_convention(self, nested_trio):
        # dropping c2 leaves two members whose depths tie at 5/6, so the
        # rerun falls back to index order while the original kept c1 first
        rep = stability_test(nested_trio, "pid", 1)
        assert rep["removed_ids"] == ["c2"]
        assert rep["pearson"] == pytest.approx(-1.0, abs=1e-14)

    def test_identical_members_flagged_degenerate(self):
        g = GridSpec((4,))
        m = ProbMask(g, np.array([0, 1, 1, 0], dtype=np.float32))
        e = Ensemble(g, [m, m, m, m])
        rep = stability_test(e, "pid", 1)
        assert rep.get("note") == "degenerate: all tied"
        assert rep["pearson"] == pytest.approx(1.0)

    def test_k_remove_bounds(self, nested_trio):
        with pytest.raises(ValidationError):
            stability_test(nested_trio, "pid", 3)
        with pytest.raises(ValidationError):
            stability_test(nested_trio, "pid", -1)
