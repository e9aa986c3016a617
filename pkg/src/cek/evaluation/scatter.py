"""Scatter diagnostics: factual accuracy and counterfactual-overlap (ignorability)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..causal import PotentialOutcomePredictions
from ..errors import ParameterError, PositivityError


@dataclass(frozen=True)
class AccuracyScatter:
    """Factual predicted-vs-observed points for continuous outcomes."""

    predicted: NDArray
    observed: NDArray
    arm: NDArray
    residual_mode: bool
    r2_by_arm: dict[int, float | None]      # cross-fold mean, None when undefined
    r2_std_by_arm: dict[int, float | None]

    def to_json_dict(self) -> dict:
        return {
            "kind": "accuracy_scatter",
            "residual_mode": self.residual_mode,
            "x": self.observed.tolist(),
            "y": (self.predicted - self.observed).tolist()
            if self.residual_mode
            else self.predicted.tolist(),
            "arm": self.arm.tolist(),
            "r2_by_arm": {str(a): v for a, v in self.r2_by_arm.items()},
            "r2_std_by_arm": {str(a): v for a, v in self.r2_std_by_arm.items()},
            "reference": "residual-zero" if self.residual_mode else "diagonal",
        }


@dataclass(frozen=True)
class IgnorabilityReport:
    """Counterfactual scatter with a grid-purity summary.

    ``violation_score`` is the fraction of populated grid cells (holding at
    least ``min_cell`` points) occupied by a single arm.
    """

    y0: NDArray
    y1: NDArray
    arm: NDArray
    grid: int
    min_cell: int
    x_edges: NDArray
    y_edges: NDArray
    cell_counts: NDArray      # (2, grid, grid) per-arm occupancy
    flagged_cells: NDArray    # (m, 2) [row, col] of single-arm populated cells
    populated_cells: int
    violation_score: float
    low_evidence: bool

    def to_json_dict(self) -> dict:
        return {
            "kind": "counterfactual_scatter",
            "x": self.y0.tolist(),
            "y": self.y1.tolist(),
            "arm": self.arm.tolist(),
            "x_edges": self.x_edges.tolist(),
            "y_edges": self.y_edges.tolist(),
            "flagged_cells": self.flagged_cells.tolist(),
            "populated_cells": self.populated_cells,
            "violation_score": self.violation_score,
            "low_evidence": self.low_evidence,
            "reference": "diagonal",
        }


def _r2(observed: NDArray, predicted: NDArray) -> float | None:
    if len(observed) < 2:
        return None
    ss_tot = float(((observed - observed.mean()) ** 2).sum())
    if ss_tot == 0.0:
        return None
    ss_res = float(((observed - predicted) ** 2).sum())
    return 1.0 - ss_res / ss_tot


def accuracy_scatter(
    po: PotentialOutcomePredictions,
    outcome: NDArray,
    treatment: NDArray,
    residual_mode: bool = False,
) -> AccuracyScatter:
    """Factual predictions against observed outcomes, colored by arm.

    Meant for continuous outcomes (binary ones go through ROC/calibration).
    Per-arm r-squared is averaged over folds with its cross-fold std; arms
    with under two samples in a fold contribute nothing and may leave the
    r-squared missing.
    """
    outcome = np.asarray(outcome, dtype=float)
    treatment = np.asarray(treatment)
    predicted = po.factual
    observed = outcome[po.row_index]
    arm = treatment[po.row_index]

    r2_by_arm: dict[int, float | None] = {}
    r2_std_by_arm: dict[int, float | None] = {}
    for a in (0, 1):
        vals = []
        for fold in np.unique(po.fold_of_row):
            sel = (po.fold_of_row == fold) & (arm == a)
            r2 = _r2(observed[sel], predicted[sel])
            if r2 is not None:
                vals.append(r2)
        r2_by_arm[a] = float(np.mean(vals)) if vals else None
        r2_std_by_arm[a] = float(np.std(vals)) if len(vals) > 1 else (0.0 if vals else None)

    return AccuracyScatter(
        predicted=predicted,
        observed=observed,
        arm=arm,
        residual_mode=residual_mode,
        r2_by_arm=r2_by_arm,
        r2_std_by_arm=r2_std_by_arm,
    )


def counterfactual_scatter(
    po: PotentialOutcomePredictions,
    treatment: NDArray,
    grid: int = 10,
    min_cell: int = 5,
) -> IgnorabilityReport:
    """Predicted outcome under control vs under treatment, arm-labeled.

    A grid over the occupied prediction range scores ignorability: cells with
    at least ``min_cell`` points that hold a single arm are flagged, and the
    violation score is flagged / populated. No populated cells gives score 0
    with a low-evidence warning.
    """
    if grid < 1:
        raise ParameterError("grid must be >= 1")
    if min_cell < 1:
        raise ParameterError("min_cell must be >= 1")
    treatment = np.asarray(treatment)
    arm = treatment[po.row_index]
    if len(np.unique(arm)) < 2:
        raise PositivityError("counterfactual scatter needs points from both arms")

    y0 = po.y_hat[:, 0]
    y1 = po.y_hat[:, 1]

    def edges(values: NDArray) -> NDArray:
        lo, hi = float(values.min()), float(values.max())
        if lo == hi:  # degenerate axis: widen so the single value sits inside
            lo, hi = lo - 0.5, hi + 0.5
        return np.linspace(lo, hi, grid + 1)

    x_edges, y_edges = edges(y0), edges(y1)
    col = np.clip(np.searchsorted(x_edges, y0, side="right") - 1, 0, grid - 1)
    row = np.clip(np.searchsorted(y_edges, y1, side="right") - 1, 0, grid - 1)

    cell_counts = np.zeros((2, grid, grid))
    for a in (0, 1):
        sel = arm == a
        np.add.at(cell_counts[a], (row[sel], col[sel]), 1.0)

    total = cell_counts.sum(axis=0)
    populated = total >= min_cell
    single_arm = populated & ((cell_counts[0] == 0) | (cell_counts[1] == 0))
    n_populated = int(populated.sum())
    flagged = np.argwhere(single_arm)

    low_evidence = n_populated == 0
    if low_evidence:
        warnings.warn(
            "no grid cell reaches min_cell points; ignorability evidence is weak",
            stacklevel=2,
        )
        score = 0.0
    else:
        score = float(len(flagged) / n_populated)

    return IgnorabilityReport(
        y0=y0,
        y1=y1,
        arm=arm,
        grid=grid,
        min_cell=min_cell,
        x_edges=x_edges,
        y_edges=y_edges,
        cell_counts=cell_counts,
        flagged_cells=flagged,
        populated_cells=n_populated,
        violation_score=score,
        low_evidence=low_evidence,
    )
