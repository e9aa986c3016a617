"""ROC, weighted ROC, expected ROC, precision-recall, and cross-fold pooling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..errors import ParameterError

POOL_GRID_POINTS = 101


@dataclass(frozen=True)
class FoldCurve:
    """One fold's diagnostic curve: points plus an optional scalar summary."""

    kind: str
    x: NDArray
    y: NDArray
    summary: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return len(self.x) == 0


@dataclass(frozen=True)
class CurveSeries:
    """Per-fold curves pooled onto a shared x-grid with pointwise mean and std."""

    kind: str
    folds: tuple[FoldCurve, ...]
    grid_x: NDArray
    mean_y: NDArray
    std_y: NDArray
    summary_mean: float | None
    summary_std: float | None

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "grid_x": self.grid_x.tolist(),
            "mean_y": self.mean_y.tolist(),
            "std_y": self.std_y.tolist(),
            "summary_mean": self.summary_mean,
            "summary_std": self.summary_std,
            "folds": [
                {
                    "x": c.x.tolist(),
                    "y": c.y.tolist(),
                    "summary": c.summary,
                    **{k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in c.extras.items()},
                }
                for c in self.folds
            ],
        }


def _grouped_descending(scores: NDArray) -> tuple[NDArray, NDArray]:
    """Sort descending and return (order, last-index-of-each-tie-group)."""
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    boundary = np.flatnonzero(np.diff(sorted_scores) != 0.0)
    ends = np.append(boundary, len(scores) - 1)
    return order, ends


def roc_curve(
    scores: NDArray, labels: NDArray, weights: NDArray | None = None
) -> FoldCurve:
    """Threshold sweep over distinct scores (ties grouped); trapezoid AUC.

    With weights the TPR/FPR accumulate weight mass instead of counts
    (kind becomes "weighted_roc"). Single-class labels give an empty curve
    with a missing AUC rather than an error.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    kind = "roc" if weights is None else "weighted_roc"
    w = np.ones(len(scores)) if weights is None else np.asarray(
        getattr(weights, "weights", weights), dtype=float
    )
    if len(labels) != len(scores) or len(w) != len(scores):
        raise ParameterError("scores, labels, and weights must share a length")

    pos_total = float(w[labels == 1].sum())
    neg_total = float(w[labels != 1].sum())
    if pos_total == 0.0 or neg_total == 0.0:
        return FoldCurve(
            kind=kind,
            x=np.array([]),
            y=np.array([]),
            summary=None,
            extras={"reason": "single-class labels"},
        )

    order, ends = _grouped_descending(scores)
    pos_mass = np.cumsum(np.where(labels[order] == 1, w[order], 0.0))[ends]
    neg_mass = np.cumsum(np.where(labels[order] != 1, w[order], 0.0))[ends]
    tpr = np.concatenate([[0.0], pos_mass / pos_total])
    fpr = np.concatenate([[0.0], neg_mass / neg_total])
    auc = float(np.trapezoid(tpr, fpr))
    return FoldCurve(kind=kind, x=fpr, y=tpr, summary=auc)


def expected_roc(propensities: NDArray) -> FoldCurve:
    """ROC implied by taking each predicted propensity as the true treatment rate.

    Sweeping thresholds down the sorted propensities, every sample above the
    cut contributes its propensity to the true-positive mass and its
    complement to the false-positive mass.
    """
    p = np.asarray(getattr(propensities, "scores", propensities), dtype=float)
    if len(p) == 0:
        raise ParameterError("expected_roc needs at least one propensity")
    order, ends = _grouped_descending(p)
    tp_mass = np.cumsum(p[order])[ends]
    fp_mass = np.cumsum(1.0 - p[order])[ends]
    tp_total, fp_total = float(p.sum()), float((1.0 - p).sum())
    if tp_total == 0.0 or fp_total == 0.0:
        return FoldCurve(
            kind="expected_roc",
            x=np.array([]),
            y=np.array([]),
            summary=None,
            extras={"reason": "degenerate propensities (all 0 or all 1)"},
        )
    tpr = np.concatenate([[0.0], tp_mass / tp_total])
    fpr = np.concatenate([[0.0], fp_mass / fp_total])
    return FoldCurve(kind="expected_roc", x=fpr, y=tpr, summary=float(np.trapezoid(tpr, fpr)))


def pr_curve(scores: NDArray, labels: NDArray) -> FoldCurve:
    """Precision/recall per threshold (ties grouped); summary is average precision."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if len(labels) != len(scores):
        raise ParameterError("scores and labels must share a length")
    pos_total = float((labels == 1).sum())
    if pos_total == 0.0:
        return FoldCurve(
            kind="pr",
            x=np.array([]),
            y=np.array([]),
            summary=None,
            extras={"reason": "no positive labels"},
        )

    order, ends = _grouped_descending(scores)
    tp = np.cumsum(labels[order] == 1)[ends].astype(float)
    taken = (ends + 1).astype(float)
    precision = tp / taken
    recall = tp / pos_total
    # Step-integral average precision: sum (R_i - R_{i-1}) * P_i.
    ap = float(np.sum(np.diff(np.concatenate([[0.0], recall])) * precision))
    return FoldCurve(kind="pr", x=recall, y=precision, summary=ap)


def pool_folds(curves: list[FoldCurve]) -> CurveSeries:
    """Interpolate each fold's y onto a shared 101-point x-grid and average.

    ROC-family curves are anchored at (0,0) and (1,1) before interpolation.
    Scalar summaries pool as mean +/- std over the folds that have one; with
    fewer than two usable folds the std is 0 and a warning fires.
    """
    if not curves:
        raise ParameterError("pool_folds needs at least one fold curve")
    kinds = {c.kind for c in curves}
    if len(kinds) > 1:
        raise ParameterError(f"cannot pool mixed curve kinds {sorted(kinds)}")
    kind = curves[0].kind

    grid = np.linspace(0.0, 1.0, POOL_GRID_POINTS)
    usable = [c for c in curves if not c.empty]
    if len(usable) < 2:
        warnings.warn(
            f"pooling {len(usable)} usable fold(s) for kind={kind}; std reported as 0",
            stacklevel=2,
        )

    rows = []
    for c in usable:
        x, y = c.x, c.y
        if kind in ("roc", "weighted_roc", "expected_roc"):
            if len(x) == 0 or x[0] != 0.0:
                x, y = np.concatenate([[0.0], x]), np.concatenate([[0.0], y])
            if x[-1] != 1.0:
                x, y = np.concatenate([x, [1.0]]), np.concatenate([y, [1.0]])
        order = np.argsort(x, kind="stable")
        interpolated = np.interp(grid, x[order], y[order])
        if kind in ("roc", "weighted_roc", "expected_roc"):
            interpolated[0], interpolated[-1] = 0.0, 1.0  # pin (0,0) and (1,1)
        rows.append(interpolated)

    if rows:
        stacked = np.vstack(rows)
        mean_y, std_y = stacked.mean(axis=0), stacked.std(axis=0)
    else:
        mean_y = np.full(POOL_GRID_POINTS, np.nan)
        std_y = np.zeros(POOL_GRID_POINTS)

    summaries = np.array([c.summary for c in usable if c.summary is not None])
    summary_mean = float(summaries.mean()) if len(summaries) else None
    summary_std = float(summaries.std()) if len(summaries) > 1 else (0.0 if len(summaries) else None)
    return CurveSeries(
        kind=kind,
        folds=tuple(curves),
        grid_x=grid,
        mean_y=mean_y,
        std_y=std_y,
        summary_mean=summary_mean,
        summary_std=summary_std,
    )
