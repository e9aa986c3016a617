"""Probability calibration: isotonic (pool-adjacent-violators) and sigmoid maps."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit, logit

from ..errors import ParameterError
from ..cohort import FoldPlan


@dataclass(frozen=True)
class CalibrationMap:
    """Monotone non-decreasing map from raw scores to probabilities in [0, 1].

    ``isotonic`` maps are step functions: ``levels[i]`` applies from
    ``breakpoints[i]`` (inclusive) up to the next breakpoint; scores outside
    the fitted range clamp to the boundary levels. ``sigmoid`` maps are
    ``expit(slope * s + offset)`` with ``slope >= 0`` enforced, so both kinds
    are monotone by construction.
    """

    method: str  # "isotonic" | "sigmoid"
    breakpoints: NDArray | None = None
    levels: NDArray | None = None
    slope: float | None = None
    offset: float | None = None

    def apply(self, scores: NDArray) -> NDArray:
        scores = np.asarray(scores, dtype=float)
        if self.method == "isotonic":
            idx = np.searchsorted(self.breakpoints, scores, side="right") - 1
            idx = np.clip(idx, 0, len(self.levels) - 1)
            return self.levels[idx]
        if self.method == "sigmoid":
            return expit(self.slope * scores + self.offset)
        raise ParameterError(f"unknown calibration method {self.method!r}")

    def to_json_dict(self) -> dict:
        if self.method == "isotonic":
            return {
                "kind": "isotonic",
                "breakpoints": self.breakpoints.tolist(),
                "levels": self.levels.tolist(),
            }
        return {"kind": "sigmoid", "slope": float(self.slope), "offset": float(self.offset)}


def _constant_map(value: float) -> CalibrationMap:
    return CalibrationMap(
        method="isotonic",
        breakpoints=np.array([0.0]),
        levels=np.array([float(np.clip(value, 0.0, 1.0))]),
    )


def fit_isotonic(
    scores: NDArray, labels: NDArray, weights: NDArray | None = None
) -> CalibrationMap:
    """Weighted least-squares monotone step fit of labels on score order (PAV).

    Exact ties in score are pooled into one point before running
    pool-adjacent-violators, so the fitted map is a function of the score.
    All labels identical yields a constant map, not an error.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if len(scores) != len(labels):
        raise ParameterError("scores and labels differ in length")
    if len(scores) < 2:
        raise ParameterError("isotonic fit needs at least 2 samples")
    if not np.isfinite(scores).all():
        raise ParameterError("scores must be finite")
    if weights is None:
        weights = np.ones(len(scores))
    else:
        weights = np.asarray(weights, dtype=float)
        if (weights < 0).any() or not np.isfinite(weights).all() or weights.sum() == 0:
            raise ParameterError("weights must be nonnegative, finite, not all zero")

    order = np.argsort(scores, kind="stable")
    s_sorted = scores[order]
    y_sorted = labels[order]
    w_sorted = weights[order]

    # Pool exact score ties into single weighted points.
    uniq, start = np.unique(s_sorted, return_index=True)
    block_w = np.add.reduceat(w_sorted, start)
    block_wy = np.add.reduceat(w_sorted * y_sorted, start)

    # Pool adjacent violators via a block stack.
    values: list[float] = []
    wsums: list[float] = []
    starts: list[int] = []
    for i in range(len(uniq)):
        values.append(block_wy[i] / block_w[i] if block_w[i] > 0 else 0.0)
        wsums.append(block_w[i])
        starts.append(i)
        while len(values) > 1 and values[-2] >= values[-1]:
            w_merged = wsums[-2] + wsums[-1]
            v_merged = (
                (values[-2] * wsums[-2] + values[-1] * wsums[-1]) / w_merged
                if w_merged > 0
                else values[-2]
            )
            values.pop(), wsums.pop(), starts.pop()
            values[-1], wsums[-1] = v_merged, w_merged

    breakpoints = uniq[np.array(starts)]
    levels = np.clip(np.array(values), 0.0, 1.0)
    return CalibrationMap(method="isotonic", breakpoints=breakpoints, levels=levels)


def fit_sigmoid_calibration(scores: NDArray, labels: NDArray) -> CalibrationMap:
    """Two-parameter sigmoid calibration by penalized MLE (Platt-style).

    Targets use the standard label-smoothing values (N+1)/(N+2) and 1/(N+2).
    The slope is constrained nonnegative so the map is monotone
    non-decreasing; degenerate labels fall back to a constant map with a
    warning.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if len(scores) != len(labels):
        raise ParameterError("scores and labels differ in length")
    if not np.isfinite(scores).all():
        raise ParameterError("scores must be finite")

    n_pos = float(np.sum(labels == 1))
    n_neg = float(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        smoothed = (n_pos + 1.0) / (len(labels) + 2.0)
        warnings.warn(
            "sigmoid calibration with single-class labels; returning constant map",
            stacklevel=2,
        )
        return _constant_map(smoothed)

    target = np.where(labels == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))

    a, b = 0.0, float(logit(target.mean()))
    design = np.column_stack([scores, np.ones(len(scores))])

    def objective(params):
        p = np.clip(expit(design @ params), 1e-12, 1 - 1e-12)
        return float(np.sum(target * np.log(p) + (1 - target) * np.log1p(-p)))

    params = np.array([a, b])
    obj = objective(params)
    for _ in range(100):
        p = expit(design @ params)
        grad = design.T @ (target - p)
        if np.abs(grad).max() <= 1e-10:
            break
        curvature = p * (1 - p)
        hess = (design * curvature[:, None]).T @ design
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        scale = 1.0
        for _ in range(50):
            candidate = params + scale * step
            new_obj = objective(candidate)
            if new_obj >= obj:
                break
            scale *= 0.5
        else:
            break
        params, obj = candidate, new_obj

    slope, offset = float(params[0]), float(params[1])
    if slope < 0:
        # Constrained optimum sits on the slope=0 boundary: constant at mean target.
        slope, offset = 0.0, float(logit(target.mean()))
    return CalibrationMap(method="sigmoid", slope=slope, offset=offset)


@dataclass(frozen=True)
class CalibratedModel:
    """A base model composed with a calibration map fitted on held-out scores."""

    base: object
    map: CalibrationMap

    def predict_proba(self, X: NDArray) -> NDArray:
        return self.map.apply(self.base.predict_proba(X))

    def to_json_dict(self) -> dict:
        base_dump = self.base.to_json_dict() if hasattr(self.base, "to_json_dict") else None
        return {"kind": "calibrated", "base": base_dump, "map": self.map.to_json_dict()}


def calibrate_cv(
    base_fit: Callable[[NDArray, NDArray], object],
    method: str,
    X: NDArray,
    y: NDArray,
    folds: FoldPlan,
) -> tuple[object, CalibrationMap]:
    """Fit a calibration map on out-of-fold scores, then refit the base on all data.

    ``base_fit(X, y)`` must return an object with ``predict_proba``. The map
    never sees in-sample scores: fold ``f``'s validation scores come from a
    base model trained without fold ``f``.
    """
    if method not in ("isotonic", "sigmoid"):
        raise ParameterError(f"unknown calibration method {method!r}")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if folds.n != len(y):
        raise ParameterError("fold plan does not match data length")

    oof_scores = np.empty(len(y))
    for fold in range(folds.k):
        train_idx = folds.train_index(fold)
        val_idx = folds.validation_index(fold)
        model = base_fit(X[train_idx], y[train_idx])
        oof_scores[val_idx] = model.predict_proba(X[val_idx])

    if method == "isotonic":
        cal_map = fit_isotonic(oof_scores, y)
    else:
        cal_map = fit_sigmoid_calibration(oof_scores, y)

    final = base_fit(X, y)
    return final, cal_map
