"""Covariate balance: standardized mean differences and the Love-plot table."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..cohort import CohortFrame, FoldPlan
from ..errors import ParameterError

PHASES = ("train", "validation")


def weighted_mean_var(x: NDArray, w: NDArray | None = None) -> tuple[float, float]:
    """Frequency-weight mean and variance: sum(w(x-m)^2)/sum(w)."""
    x = np.asarray(x, dtype=float)
    if w is None:
        return float(x.mean()), float(x.var())
    w = np.asarray(w, dtype=float)
    total = w.sum()
    if total <= 0:
        raise ParameterError("weights must not sum to zero")
    mean = float((w * x).sum() / total)
    var = float((w * (x - mean) ** 2).sum() / total)
    return mean, var


def smd(
    x_t: NDArray,
    x_c: NDArray,
    w_t: NDArray | None = None,
    w_c: NDArray | None = None,
) -> float:
    """Absolute standardized mean difference |m_t - m_c| / sqrt((v_t + v_c)/2).

    Zero pooled variance returns 0 when the means agree and +inf (a flagged
    sentinel that sorts above every finite value) when they differ.
    """
    x_t, x_c = np.asarray(x_t, dtype=float), np.asarray(x_c, dtype=float)
    if len(x_t) == 0 or len(x_c) == 0:
        raise ParameterError("smd requires a nonempty sample in each group")
    if w_t is not None and ((np.asarray(w_t) < 0).any() or not np.isfinite(w_t).all()):
        raise ParameterError("treated weights must be finite and nonnegative")
    if w_c is not None and ((np.asarray(w_c) < 0).any() or not np.isfinite(w_c).all()):
        raise ParameterError("control weights must be finite and nonnegative")

    mean_t, var_t = weighted_mean_var(x_t, w_t)
    mean_c, var_c = weighted_mean_var(x_c, w_c)
    pooled = np.sqrt((var_t + var_c) / 2.0)
    diff = abs(mean_t - mean_c)
    if pooled == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return float(diff / pooled)


@dataclass(frozen=True)
class BalanceRow:
    covariate: str
    unweighted: dict[str, NDArray]  # phase -> per-fold SMD
    weighted: dict[str, NDArray]
    unweighted_mean: float          # primary-phase fold mean
    weighted_mean: float
    flagged: bool


@dataclass(frozen=True)
class BalanceTable:
    """Per-covariate SMDs with and without weights, per fold and phase.

    Rows are sorted by descending primary-phase unweighted mean SMD (the
    Love-plot order); ``flagged`` marks covariates whose primary-phase
    weighted mean exceeds the threshold.
    """

    rows: tuple[BalanceRow, ...]
    threshold: float
    k: int
    phases: tuple[str, ...]
    primary_phase: str

    @property
    def flags(self) -> tuple[str, ...]:
        return tuple(r.covariate for r in self.rows if r.flagged)

    def row(self, covariate: str) -> BalanceRow:
        for r in self.rows:
            if r.covariate == covariate:
                return r
        raise KeyError(covariate)

    def to_json_dict(self) -> dict:
        return {
            "kind": "balance_table",
            "threshold": self.threshold,
            "primary_phase": self.primary_phase,
            "covariates": [
                {
                    "name": r.covariate,
                    "smd_unweighted": _json_float(r.unweighted_mean),
                    "smd_weighted": _json_float(r.weighted_mean),
                    "flagged": r.flagged,
                }
                for r in self.rows
            ],
        }


def _json_float(x: float):
    """Finite floats pass through; non-finite become strings for strict JSON."""
    if np.isfinite(x):
        return float(x)
    return "nan" if np.isnan(x) else ("inf" if x > 0 else "-inf")


def _fold_mean(values: NDArray) -> float:
    """Fold mean; +inf sentinel dominates, all-undefined folds give NaN."""
    if np.isposinf(values).any():
        return float("inf")
    finite = values[np.isfinite(values)]
    return float(finite.mean()) if len(finite) else float("nan")


def balance_report(
    frame: CohortFrame,
    weights_per_fold: list[NDArray],
    folds: FoldPlan,
    phase: str = "validation",
    threshold: float = 0.1,
) -> BalanceTable:
    """Per-covariate SMD table, fold by fold, with and without weights.

    ``phase`` may be "train", "validation", or "both"; flags and sort order
    always follow the validation side when both are computed (fold means are
    taken over validation folds, matching how the balance plot is read).
    """
    wanted = PHASES if phase == "both" else (phase,)
    for p in wanted:
        if p not in PHASES:
            raise ParameterError(f"unknown phase {p!r}")
    if len(weights_per_fold) != folds.k:
        raise ParameterError("need one weight vector per fold")

    primary = "validation" if phase == "both" else phase
    unweighted = {p: np.empty((frame.d, folds.k)) for p in wanted}
    weighted = {p: np.empty((frame.d, folds.k)) for p in wanted}

    for p in wanted:
        for fold in range(folds.k):
            rows = folds.validation_index(fold) if p == "validation" else folds.train_index(fold)
            treated = rows[frame.treatment[rows] == 1]
            control = rows[frame.treatment[rows] != 1]
            if len(treated) == 0 or len(control) == 0:
                raise ParameterError(f"fold {fold} {p} rows lack a treatment arm")
            w = np.asarray(
                getattr(weights_per_fold[fold], "weights", weights_per_fold[fold]), dtype=float
            )
            # Matching can zero out an arm within a fold slice; the weighted
            # SMD is undefined there and recorded as NaN rather than raised.
            weights_usable = w[treated].sum() > 0 and w[control].sum() > 0
            for j in range(frame.d):
                x = frame.covariates[:, j]
                unweighted[p][j, fold] = smd(x[treated], x[control])
                weighted[p][j, fold] = (
                    smd(x[treated], x[control], w[treated], w[control])
                    if weights_usable
                    else float("nan")
                )

    rows_out = []
    for j, name in enumerate(frame.covariate_names):
        u_mean = _fold_mean(unweighted[primary][j])
        w_mean = _fold_mean(weighted[primary][j])
        rows_out.append(
            BalanceRow(
                covariate=name,
                unweighted={p: unweighted[p][j].copy() for p in wanted},
                weighted={p: weighted[p][j].copy() for p in wanted},
                unweighted_mean=u_mean,
                weighted_mean=w_mean,
                flagged=bool(w_mean > threshold),
            )
        )
    # Love-plot order: descending unweighted SMD, name as deterministic tiebreak.
    rows_out.sort(key=lambda r: (-r.unweighted_mean, r.covariate))
    return BalanceTable(
        rows=tuple(rows_out),
        threshold=threshold,
        k=folds.k,
        phases=wanted,
        primary_phase=primary,
    )
