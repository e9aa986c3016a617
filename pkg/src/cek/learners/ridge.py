"""Closed-form ridge regression for continuous outcomes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import ParameterError


@dataclass(frozen=True)
class RidgeModel:
    coefficients: NDArray
    intercept: float
    l2: float

    def predict(self, X: NDArray) -> NDArray:
        return X @ self.coefficients + self.intercept

    def to_json_dict(self) -> dict:
        return {
            "kind": "ridge",
            "coefficients": self.coefficients.tolist(),
            "intercept": float(self.intercept),
            "l2": float(self.l2),
        }


def fit_ridge(
    X: NDArray,
    y: NDArray,
    sample_weights: NDArray | None = None,
    l2: float = 0.0,
) -> RidgeModel:
    """Weighted least squares with an L2 penalty on coefficients (intercept free)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ParameterError("X must be (n, d) with matching y")
    if not np.isfinite(X).all() or not np.isfinite(y).all():
        raise ParameterError("NaN or infinite values in training data")
    n, d = X.shape
    w = np.ones(n) if sample_weights is None else np.asarray(sample_weights, dtype=float)
    if (w < 0).any() or not np.isfinite(w).all() or w.sum() == 0:
        raise ParameterError("sample_weights must be finite, nonnegative, not all zero")

    design = np.column_stack([np.ones(n), X])
    gram = (design * w[:, None]).T @ design
    gram[1:, 1:] += l2 * np.eye(d)
    rhs = design.T @ (w * y)
    try:
        beta = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError:
        beta = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    return RidgeModel(coefficients=beta[1:].copy(), intercept=float(beta[0]), l2=float(l2))
