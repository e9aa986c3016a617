"""L2-regularized logistic regression fitted by IRLS with step-halving."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from ..errors import ParameterError

PROB_FLOOR = 1e-12  # keeps log-likelihood finite; predictions stay in (0, 1)


@dataclass(frozen=True)
class LinearModel:
    """Fitted logistic model. ``coefficients`` excludes the intercept."""

    coefficients: NDArray
    intercept: float
    l2: float
    converged: bool
    iterations: int
    diagnostic: str | None = None

    def decision(self, X: NDArray) -> NDArray:
        return X @ self.coefficients + self.intercept

    def predict_proba(self, X: NDArray) -> NDArray:
        p = expit(self.decision(X))
        return np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)

    def to_json_dict(self) -> dict:
        return {
            "kind": "logistic",
            "coefficients": self.coefficients.tolist(),
            "intercept": float(self.intercept),
            "l2": float(self.l2),
            "converged": bool(self.converged),
            "iterations": int(self.iterations),
        }


def penalized_loglik(
    beta: NDArray, X: NDArray, y: NDArray, weights: NDArray, l2: float
) -> float:
    """Weighted log-likelihood minus (l2/2)*||coefficients||^2 (intercept free).

    ``beta`` is the full parameter vector [intercept, coefficients].
    """
    eta = beta[0] + X @ beta[1:]
    p = np.clip(expit(eta), PROB_FLOOR, 1.0 - PROB_FLOOR)
    ll = float(np.sum(weights * (y * np.log(p) + (1.0 - y) * np.log1p(-p))))
    return ll - 0.5 * l2 * float(beta[1:] @ beta[1:])


def penalized_gradient(
    beta: NDArray, X: NDArray, y: NDArray, weights: NDArray, l2: float
) -> NDArray:
    """Gradient of :func:`penalized_loglik` in the same parameter layout."""
    eta = beta[0] + X @ beta[1:]
    residual = weights * (y - expit(eta))
    grad = np.empty_like(beta)
    grad[0] = residual.sum()
    grad[1:] = X.T @ residual - l2 * beta[1:]
    return grad


def fit_logistic(
    X: NDArray,
    y: NDArray,
    sample_weights: NDArray | None = None,
    l2: float = 0.0,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> LinearModel:
    """Maximize the weighted L2-penalized log-likelihood by Newton/IRLS steps.

    The intercept is unpenalized. Each Newton step is halved until the
    objective does not decrease, so the objective is monotone across
    iterations. Convergence is declared when the gradient max-norm drops to
    ``tol``; separable unpenalized problems return ``converged=False`` rather
    than raising.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2:
        raise ParameterError("X must be a 2-D matrix")
    n, d = X.shape
    if len(y) != n:
        raise ParameterError("y length does not match X rows")
    if not np.isfinite(X).all() or not np.isfinite(y).all():
        raise ParameterError("NaN or infinite values in training data")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ParameterError("labels must be 0/1")
    if l2 < 0:
        raise ParameterError("l2 must be nonnegative")

    if sample_weights is None:
        w = np.ones(n)
    else:
        w = np.asarray(sample_weights, dtype=float)
        if len(w) != n:
            raise ParameterError("sample_weights length does not match X rows")
        if not np.isfinite(w).all() or (w < 0).any():
            raise ParameterError("sample_weights must be finite and nonnegative")
        if w.sum() == 0:
            raise ParameterError("sample_weights sum to zero")

    ybar = float(np.average(y, weights=w))
    if l2 == 0.0 and (ybar == 0.0 or ybar == 1.0):
        raise ParameterError("constant labels with l2=0 have no finite optimum")

    beta = np.zeros(d + 1)
    # Intercept-only start: exact optimum when X carries no signal.
    beta[0] = float(np.log(ybar / (1.0 - ybar))) if 0.0 < ybar < 1.0 else 0.0

    objective = penalized_loglik(beta, X, y, w, l2)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        grad = penalized_gradient(beta, X, y, w, l2)
        if np.abs(grad).max() <= tol:
            converged = True
            iterations -= 1
            break

        p = expit(beta[0] + X @ beta[1:])
        curvature = w * p * (1.0 - p)
        # Hessian of the NEGATIVE objective, with the ridge on coefficients only.
        hess = np.empty((d + 1, d + 1))
        hess[0, 0] = curvature.sum()
        hess[0, 1:] = hess[1:, 0] = X.T @ curvature
        hess[1:, 1:] = (X * curvature[:, None]).T @ X + l2 * np.eye(d)

        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]

        scale = 1.0
        for _ in range(50):
            candidate = beta + scale * step
            new_objective = penalized_loglik(candidate, X, y, w, l2)
            if new_objective >= objective:
                break
            scale *= 0.5
        else:
            break  # no ascent possible along the Newton direction
        beta = candidate
        objective = new_objective
    else:
        iterations = max_iter

    grad = penalized_gradient(beta, X, y, w, l2)
    if np.abs(grad).max() <= tol:
        converged = True

    diagnostic = None
    if l2 == 0.0 and np.abs(y - expit(beta[0] + X @ beta[1:])).max() < 1e-6:
        # Every residual vanished without a penalty: the data are separable and
        # the true optimum is at infinity; the gradient only underflowed.
        converged = False
        diagnostic = "perfect separation with l2=0; no finite optimum"

    return LinearModel(
        coefficients=beta[1:].copy(),
        intercept=float(beta[0]),
        l2=l2,
        converged=converged,
        iterations=iterations,
        diagnostic=diagnostic,
    )
