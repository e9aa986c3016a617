import numpy as np
import pytest

from cek.errors import ParameterError
from cek.evaluation.curves import (
    FoldCurve,
    expected_roc,
    pool_folds,
    pr_curve,
    roc_curve,
)


def concordance_auc(scores, labels, weights=None):
    """Brute-force pairwise oracle: weighted Mann-Whitney with ties at 0.5."""
    scores = np.asarray(scores, float)
    labels = np.asarray(labels, float)
    w = np.ones(len(scores)) if weights is None else np.asarray(weights, float)
    pos = np.flatnonzero(labels == 1)
    neg = np.flatnonzero(labels != 1)
    num, den = 0.0, 0.0
    for i in pos:
        for j in neg:
            pair_w = w[i] * w[j]
            den += pair_w
            if scores[i] > scores[j]:
                num += pair_w
            elif scores[i] == scores[j]:
                num += 0.5 * pair_w
    return num / den


class TestRocCurve:
    def test_perfect_separation_auc_one(self):
        curve = roc_curve(np.array([0.9, 0.8, 0.2, 0.1]), np.array([1, 1, 0, 0]))
        assert curve.summary == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_pairwise_concordance(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 200))
        scores = np.round(rng.random(n), 2)  # coarse grid forces ties
        labels = (rng.random(n) < 0.4).astype(float)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        assert roc_curve(scores, labels).summary == pytest.approx(
            concordance_auc(scores, labels), abs=1e-10
        )

    @pytest.mark.parametrize("seed", range(10))
    def test_weighted_matches_weighted_concordance(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(5, 120))
        scores = np.round(rng.random(n), 2)
        labels = (rng.random(n) < 0.5).astype(float)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        weights = rng.random(n) * 3 + 0.1
        assert roc_curve(scores, labels, weights).summary == pytest.approx(
            concordance_auc(scores, labels, weights), abs=1e-10
        )

    def test_single_class_auc_missing(self):
        curve = roc_curve(np.array([0.2, 0.7]), np.array([1, 1]))
        assert curve.summary is None
        assert curve.empty

    def test_points_monotone_both_axes(self):
        rng = np.random.default_rng(3)
        curve = roc_curve(rng.random(100), (rng.random(100) < 0.5).astype(float))
        assert (np.diff(curve.x) >= 0).all()
        assert (np.diff(curve.y) >= 0).all()


class TestExpectedRoc:
    def test_uniform_half_is_diagonal(self):
        curve = expected_roc(np.full(50, 0.5))
        np.testing.assert_allclose(curve.x, curve.y)
        assert curve.summary == pytest.approx(0.5)

    def test_two_level_instance_matches_mass_sums(self):
        n1, n2 = 40, 60  # p=0.01 group, p=0.99 group
        p = np.r_[np.full(n1, 0.01), np.full(n2, 0.99)]
        curve = expected_roc(p)
        tp_total = 0.01 * n1 + 0.99 * n2
        fp_total = 0.99 * n1 + 0.01 * n2
        # After sweeping past the 0.99 group: that group's full mass is in.
        mid = (0.99 * n2 / tp_total, 0.01 * n2 / fp_total)
        idx = np.searchsorted(curve.x, mid[1])
        assert curve.y[idx] == pytest.approx(mid[0])
        # AUC from the trapezoid over the three mass points (independent calc)
        xs = np.array([0.0, mid[1], 1.0])
        ys = np.array([0.0, mid[0], 1.0])
        assert curve.summary == pytest.approx(np.trapezoid(ys, xs), abs=1e-12)

    def test_ties_handled_in_groups(self):
        curve = expected_roc(np.array([0.3, 0.3, 0.8, 0.8]))
        assert len(curve.x) == 3  # origin + two tie groups


class TestPrCurve:
    def test_perfect_separation_precision_one(self):
        curve = pr_curve(np.array([0.9, 0.8, 0.2, 0.1]), np.array([1, 1, 0, 0]))
        positives = curve.x <= 1.0
        assert (curve.y[curve.x > 0] >= 1.0 - 1e-12).any()
        assert curve.y[0] == pytest.approx(1.0)

    def test_all_positive_predictions_precision_prevalence(self):
        scores = np.full(10, 0.9)
        labels = np.r_[np.ones(3), np.zeros(7)]
        curve = pr_curve(scores, labels)
        assert curve.x[-1] == pytest.approx(1.0)
        assert curve.y[-1] == pytest.approx(0.3)

    def test_random_scores_ap_near_prevalence(self):
        rng = np.random.default_rng(0)
        scores = rng.random(2000)
        labels = (rng.random(2000) < 0.1).astype(float)
        assert pr_curve(scores, labels).summary == pytest.approx(0.1, abs=0.05)

    def test_no_positives_missing(self):
        assert pr_curve(np.array([0.1, 0.9]), np.zeros(2)).summary is None


class TestPoolFolds:
    def test_identical_folds_zero_std(self):
        rng = np.random.default_rng(1)
        scores = rng.random(60)
        labels = (rng.random(60) < 0.5).astype(float)
        fold = roc_curve(scores, labels)
        pooled = pool_folds([fold] * 5)
        np.testing.assert_allclose(pooled.std_y, 0.0, atol=1e-15)
        assert pooled.summary_std == pytest.approx(0.0)
        assert pooled.summary_mean == pytest.approx(fold.summary)

    def test_interpolation_arithmetic(self):
        a = FoldCurve(kind="roc", x=np.array([0.0, 1.0]), y=np.array([0.0, 1.0]), summary=0.5)
        b = FoldCurve(
            kind="roc",
            x=np.array([0.0, 0.5, 1.0]),
            y=np.array([0.0, 1.0, 1.0]),
            summary=0.75,
        )
        pooled = pool_folds([a, b])
        at = np.flatnonzero(np.isclose(pooled.grid_x, 0.25))[0]
        assert pooled.mean_y[at] == pytest.approx((0.25 + 0.5) / 2)

    def test_roc_endpoints_pinned(self):
        rng = np.random.default_rng(2)
        curves = [
            roc_curve(rng.random(40), (rng.random(40) < 0.5).astype(float))
            for _ in range(4)
        ]
        pooled = pool_folds(curves)
        assert pooled.mean_y[0] == pytest.approx(0.0)
        assert pooled.mean_y[-1] == pytest.approx(1.0)

    def test_single_fold_warns_with_zero_std(self):
        curve = roc_curve(np.array([0.9, 0.1]), np.array([1, 0]))
        with pytest.warns(UserWarning, match="std reported as 0"):
            pooled = pool_folds([curve])
        assert pooled.summary_std == pytest.approx(0.0)

    def test_mixed_kinds_rejected(self):
        a = roc_curve(np.array([0.9, 0.1]), np.array([1, 0]))
        b = pr_curve(np.array([0.9, 0.1]), np.array([1, 0]))
        with pytest.raises(ParameterError):
            pool_folds([a, b])
