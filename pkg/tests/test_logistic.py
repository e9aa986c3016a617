import numpy as np
import pytest

from cek.errors import ParameterError
from cek.learners import fit_logistic, penalized_gradient, penalized_loglik


def finite_difference_gradient(beta, X, y, w, l2, h=1e-5):
    """Central-difference oracle for the penalized log-likelihood gradient."""
    grad = np.empty_like(beta)
    for j in range(len(beta)):
        hi, lo = beta.copy(), beta.copy()
        hi[j] += h
        lo[j] -= h
        grad[j] = (
            penalized_loglik(hi, X, y, w, l2) - penalized_loglik(lo, X, y, w, l2)
        ) / (2 * h)
    return grad


def random_instance(seed, n=50, d=3):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, d))
    logits = X @ rng.normal(0.0, 1.0, d) - 0.3
    y = (rng.random(n) < 1 / (1 + np.exp(-logits))).astype(float)
    return X, y


class TestAnalyticCases:
    def test_no_features_gives_logit_of_mean(self):
        X = np.zeros((8, 3))
        y = np.array([1, 0, 0, 0, 1, 0, 0, 0], dtype=float)
        model = fit_logistic(X, y, l2=0.0)
        assert model.converged
        assert model.intercept == pytest.approx(np.log(0.25 / 0.75), abs=1e-9)
        np.testing.assert_allclose(model.coefficients, 0.0, atol=1e-9)

    def test_separable_with_penalty_is_finite_and_converged(self):
        X = np.linspace(-1, 1, 20).reshape(-1, 1)
        y = (X[:, 0] > 0).astype(float)
        model = fit_logistic(X, y, l2=1.0)
        assert model.converged
        assert np.isfinite(model.coefficients).all()

    def test_separable_unpenalized_returns_diagnostic_not_exception(self):
        X = np.linspace(-1, 1, 20).reshape(-1, 1)
        y = (X[:, 0] > 0).astype(float)
        model = fit_logistic(X, y, l2=0.0, max_iter=50)
        assert not model.converged
        assert np.isfinite(model.coefficients).all()
        p = model.predict_proba(X)
        assert p.min() > 0.0 and p.max() < 1.0

    def test_nan_input_rejected(self):
        X = np.array([[1.0], [np.nan]])
        with pytest.raises(ParameterError):
            fit_logistic(X, np.array([0.0, 1.0]))


class TestGradientOracle:
    @pytest.mark.parametrize("seed", range(5))
    def test_gradient_matches_finite_differences_at_fit(self, seed):
        X, y = random_instance(seed)
        w = np.ones(len(y))
        l2 = 0.5
        model = fit_logistic(X, y, l2=l2, tol=1e-10)
        beta = np.concatenate([[model.intercept], model.coefficients])

        analytic = penalized_gradient(beta, X, y, w, l2)
        assert np.abs(analytic).max() <= 1e-6  # stationarity at the optimum

        numeric = finite_difference_gradient(beta, X, y, w, l2)
        denom = max(1.0, float(np.linalg.norm(numeric)))
        assert np.linalg.norm(analytic - numeric) / denom < 1e-5

    @pytest.mark.parametrize("seed", range(5))
    def test_gradient_matches_finite_differences_away_from_fit(self, seed):
        X, y = random_instance(seed + 100)
        w = np.ones(len(y))
        l2 = 0.3
        rng = np.random.default_rng(seed)
        beta = rng.normal(0.0, 0.5, X.shape[1] + 1)
        analytic = penalized_gradient(beta, X, y, w, l2)
        numeric = finite_difference_gradient(beta, X, y, w, l2)
        assert np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric) < 1e-5


class TestWeightsAndPenalty:
    def test_weighted_fit_matches_replication(self):
        X, y = random_instance(7, n=30)
        w = np.array([1.0, 2.0, 3.0] * 10)
        weighted = fit_logistic(X, y, sample_weights=w, l2=0.2, tol=1e-10)
        X_rep = np.repeat(X, w.astype(int), axis=0)
        y_rep = np.repeat(y, w.astype(int))
        replicated = fit_logistic(X_rep, y_rep, l2=0.2, tol=1e-10)
        np.testing.assert_allclose(
            weighted.coefficients, replicated.coefficients, atol=1e-6
        )

    def test_more_penalty_never_grows_coefficients(self):
        X, y = random_instance(11, n=80, d=4)
        norms = [
            np.linalg.norm(fit_logistic(X, y, l2=l2).coefficients)
            for l2 in (0.0, 0.1, 1.0, 10.0, 100.0)
        ]
        assert all(a >= b - 1e-9 for a, b in zip(norms, norms[1:]))

    def test_objective_monotone_over_iterations(self):
        X, y = random_instance(13, n=60, d=3)
        w = np.ones(len(y))
        # Re-run the ascent manually to observe the trace.
        from cek.learners.logistic import fit_logistic as fit

        model = fit(X, y, l2=0.1, tol=1e-12, max_iter=40)
        beta = np.concatenate([[model.intercept], model.coefficients])
        final = penalized_loglik(beta, X, y, w, 0.1)
        start = penalized_loglik(
            np.concatenate([[np.log(y.mean() / (1 - y.mean()))], np.zeros(3)]),
            X,
            y,
            w,
            0.1,
        )
        assert final >= start

    def test_all_zero_weights_rejected(self):
        X, y = random_instance(1)
        with pytest.raises(ParameterError):
            fit_logistic(X, y, sample_weights=np.zeros(len(y)))
