import itertools

import numpy as np
import pytest
from scipy.special import expit

from cek.cohort import make_folds
from cek.errors import ParameterError
from cek.learners import (
    calibrate_cv,
    fit_isotonic,
    fit_logistic,
    fit_sigmoid_calibration,
)


def brute_force_monotone_fit(scores, labels, weights=None):
    """Exhaustive optimal monotone step fit: best contiguous-block partition
    (in score order) whose block means are non-decreasing."""
    order = np.argsort(scores)
    y = np.asarray(labels, dtype=float)[order]
    w = np.ones(len(y)) if weights is None else np.asarray(weights, float)[order]
    n = len(y)
    best_sse, best_fit = np.inf, None
    for cuts in itertools.product([0, 1], repeat=n - 1):
        bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [n]
        means = []
        for a, b in zip(bounds, bounds[1:]):
            means.append(np.average(y[a:b], weights=w[a:b]))
        if any(m2 < m1 for m1, m2 in zip(means, means[1:])):
            continue
        fit = np.concatenate(
            [np.full(b - a, m) for (a, b), m in zip(zip(bounds, bounds[1:]), means)]
        )
        sse = float(np.sum(w * (y - fit) ** 2))
        if sse < best_sse - 1e-15:
            best_sse, best_fit = sse, fit
    return best_sse, best_fit


class TestIsotonic:
    def test_already_monotone_untouched(self):
        cm = fit_isotonic([1, 2, 3], [0, 1, 1])
        np.testing.assert_array_equal(cm.apply(np.array([1, 2, 3])), [0, 1, 1])

    def test_violator_pooled(self):
        cm = fit_isotonic([1, 2, 3], [0, 1, 0])
        np.testing.assert_allclose(cm.apply(np.array([1, 2, 3])), [0.0, 0.5, 0.5])

    def test_all_ones_constant(self):
        cm = fit_isotonic([0.1, 0.9, 0.5], [1, 1, 1])
        np.testing.assert_allclose(cm.apply(np.array([0.0, 0.5, 2.0])), 1.0)

    def test_extrapolation_clamps(self):
        cm = fit_isotonic([0.2, 0.4, 0.8], [0, 1, 1])
        assert cm.apply(np.array([-5.0]))[0] == cm.apply(np.array([0.2]))[0]
        assert cm.apply(np.array([5.0]))[0] == cm.apply(np.array([0.8]))[0]

    def test_output_non_decreasing(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            s = rng.random(30)
            y = (rng.random(30) < 0.5).astype(float)
            cm = fit_isotonic(s, y)
            grid = np.sort(rng.random(100))
            vals = cm.apply(grid)
            assert (np.diff(vals) >= -1e-12).all()

    @pytest.mark.parametrize("trial", range(200))
    def test_matches_exhaustive_oracle(self, trial):
        rng = np.random.default_rng(trial)
        n = int(rng.integers(2, 9))
        scores = rng.permutation(np.linspace(0, 1, n))  # distinct scores
        labels = (rng.random(n) < 0.5).astype(float)
        cm = fit_isotonic(scores, labels)
        fitted = cm.apply(np.sort(scores))
        y_sorted = labels[np.argsort(scores)]
        pav_sse = float(np.sum((y_sorted - fitted) ** 2))
        oracle_sse, _ = brute_force_monotone_fit(scores, labels)
        assert abs(pav_sse - oracle_sse) < 1e-12

    def test_score_ties_pooled_before_fit(self):
        cm = fit_isotonic([0.5, 0.5, 1.0], [0, 1, 1])
        # tied scores collapse to their mean before PAV
        np.testing.assert_allclose(cm.apply(np.array([0.5, 1.0])), [0.5, 1.0])

    def test_weighted_case(self):
        cm = fit_isotonic([1, 2], [1, 0], weights=[1, 3])
        np.testing.assert_allclose(cm.apply(np.array([1.0, 2.0])), 0.25)


class TestSigmoid:
    def test_recovers_identity_when_calibrated(self):
        rng = np.random.default_rng(42)
        scores = rng.random(10000)
        labels = (rng.random(10000) < scores).astype(float)
        cm = fit_sigmoid_calibration(scores, labels)
        grid = np.linspace(0.1, 0.9, 17)
        assert np.abs(cm.apply(grid) - grid).max() < 0.05

    def test_all_zero_labels_constant_near_zero(self):
        with pytest.warns(UserWarning):
            cm = fit_sigmoid_calibration(np.linspace(0, 1, 50), np.zeros(50))
        vals = cm.apply(np.linspace(0, 1, 9))
        assert (vals < 0.05).all()
        assert np.ptp(vals) == 0.0

    @pytest.mark.parametrize("seed", range(100))
    def test_monotone_on_random_fits(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 60))
        scores = rng.random(n)
        labels = (rng.random(n) < 0.5).astype(float)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        cm = fit_sigmoid_calibration(scores, labels)
        grid = np.linspace(0, 1, 50)
        assert (np.diff(cm.apply(grid)) >= -1e-12).all()


class TestCalibrateCV:
    @staticmethod
    def synthetic(n=5000, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n, 3))
        p = expit(X @ np.array([1.0, -0.7, 0.4]) + 0.2)
        y = (rng.random(n) < p).astype(float)
        return X, y

    def test_out_of_fold_scores_are_held_out(self):
        X, y = self.synthetic(n=60, seed=1)
        folds = make_folds(60, 2, 0, treatment=y)
        seen = []

        def recording_fit(Xs, ys):
            seen.append(len(ys))
            return fit_logistic(Xs, ys, l2=1.0)

        calibrate_cv(recording_fit, "isotonic", X, y, folds)
        # two training fits on fold complements plus the final full refit
        assert sorted(seen)[-1] == 60
        assert all(s < 60 for s in seen[:-1])

    def test_calibrated_no_worse_than_raw_on_well_specified_data(self):
        X, y = self.synthetic(n=5000, seed=7)
        folds = make_folds(len(y), 5, 0, treatment=y)
        base_fit = lambda Xs, ys: fit_logistic(Xs, ys, l2=1.0)
        model, cal_map = calibrate_cv(base_fit, "isotonic", X, y, folds)

        raw = model.predict_proba(X)
        calibrated = cal_map.apply(raw)

        def max_bin_gap(scores):
            edges = np.quantile(scores, np.linspace(0, 1, 11))
            idx = np.clip(np.searchsorted(edges, scores, side="right") - 1, 0, 9)
            gaps = []
            for b in range(10):
                sel = idx == b
                if sel.sum() > 50:
                    gaps.append(abs(scores[sel].mean() - y[sel].mean()))
            return max(gaps)

        assert max_bin_gap(calibrated) <= max_bin_gap(raw) + 0.01

    def test_constant_base_scores_give_label_mean(self):
        X, y = self.synthetic(n=40, seed=2)
        folds = make_folds(40, 4, 0, treatment=y)

        class Flat:
            def predict_proba(self, X):
                return np.full(len(X), 0.5)

        _, cal_map = calibrate_cv(lambda *_: Flat(), "isotonic", X, y, folds)
        np.testing.assert_allclose(cal_map.apply(np.array([0.5])), y.mean())

    def test_unknown_method_rejected(self):
        X, y = self.synthetic(n=20, seed=3)
        folds = make_folds(20, 2, 0, treatment=y)
        with pytest.raises(ParameterError):
            calibrate_cv(lambda Xs, ys: fit_logistic(Xs, ys, l2=1.0), "platt", X, y, folds)
