"""Self-contained learners used inside the causal methods."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..cohort import make_folds
from ..errors import ParameterError
from .calibration import (
    CalibratedModel,
    CalibrationMap,
    calibrate_cv,
    fit_isotonic,
    fit_sigmoid_calibration,
)
from .forest import ForestModel, Tree, fit_forest, predict_forest
from .logistic import LinearModel, fit_logistic, penalized_gradient, penalized_loglik
from .ridge import RidgeModel, fit_ridge

__all__ = [
    "CalibratedModel",
    "CalibrationMap",
    "ForestModel",
    "LearnerSpec",
    "LinearModel",
    "RidgeModel",
    "Tree",
    "calibrate_cv",
    "derive_seed",
    "fit_forest",
    "fit_isotonic",
    "fit_learner",
    "fit_logistic",
    "fit_ridge",
    "fit_sigmoid_calibration",
    "penalized_gradient",
    "penalized_loglik",
    "predict_forest",
]


def derive_seed(*parts: int) -> int:
    """Collapse a (seed, salt, ...) tuple into one reproducible integer seed."""
    return int(np.random.SeedSequence(entropy=list(parts)).generate_state(1)[0])


@dataclass(frozen=True)
class LearnerSpec:
    """Declarative description of a model used inside a causal method.

    ``kind`` selects the family: "logistic" (optionally calibrated via
    ``calibration``), "forest" (binary classification), or "linear" (ridge
    regression for continuous outcomes).
    """

    kind: str = "logistic"
    l2: float = 1.0
    calibration: str | None = None   # None | "isotonic" | "sigmoid"
    calibration_folds: int = 3
    n_trees: int = 500
    max_depth: int | None = None
    min_leaf: int = 1
    seed: int = 0

    def describe(self) -> str:
        if self.kind == "logistic" and self.calibration:
            return f"{self.calibration}-calibrated logistic(l2={self.l2})"
        if self.kind == "logistic":
            return f"logistic(l2={self.l2})"
        if self.kind == "forest":
            depth = "inf" if self.max_depth is None else self.max_depth
            return f"forest(T={self.n_trees}, depth={depth}, min_leaf={self.min_leaf})"
        return f"ridge(l2={self.l2})"

    @classmethod
    def from_dict(cls, raw: dict) -> "LearnerSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ParameterError(f"unknown learner fields: {sorted(unknown)}")
        return cls(**raw)


def fit_learner(spec: LearnerSpec, X: NDArray, y: NDArray, salt: int = 0):
    """Fit the model described by ``spec``; returns an object with predict methods.

    ``salt`` perturbs ``spec.seed`` so per-fold fits are independent yet
    reproducible.
    """
    seed = derive_seed(spec.seed, salt)
    if spec.kind == "logistic":
        if spec.calibration is None:
            return fit_logistic(X, y, l2=spec.l2)
        inner = make_folds(
            len(y), spec.calibration_folds, seed, treatment=y, stratified=True
        )
        base, cal_map = calibrate_cv(
            lambda Xs, ys: fit_logistic(Xs, ys, l2=spec.l2),
            spec.calibration,
            X,
            y,
            inner,
        )
        return CalibratedModel(base=base, map=cal_map)
    if spec.kind == "forest":
        return fit_forest(
            X,
            y,
            n_trees=spec.n_trees,
            max_depth=spec.max_depth,
            min_leaf=spec.min_leaf,
            seed=seed,
        )
    if spec.kind == "linear":
        return fit_ridge(X, y, l2=spec.l2)
    raise ParameterError(f"unknown learner kind {spec.kind!r}")
