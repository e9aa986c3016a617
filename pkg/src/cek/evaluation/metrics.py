"""Per-stratum scalar metric records for the detailed CSV reports."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ..errors import ParameterError
from .curves import roc_curve

# Fixed column order shared with the CSV emitters. Classification metrics are
# thresholded at 0.5 (">=" wins ties); the confusion matrix is spread over
# tn/fp/fn/tp. Inapplicable metrics stay None and serialize as empty fields.
METRIC_COLUMNS = (
    "accuracy",
    "precision",
    "recall",
    "f1",
    "roc_auc",
    "hinge_loss",
    "matthews_corrcoef",
    "zero_one_loss",
    "brier_score",
    "tn",
    "fp",
    "fn",
    "tp",
    "explained_variance",
    "mean_absolute_error",
    "mean_squared_error",
    "mean_squared_log_error",
    "median_absolute_error",
    "r2",
)

THRESHOLD = 0.5


@dataclass(frozen=True)
class MetricsRecord:
    """One row of the detailed metrics CSV: (TX, O, phase, fold, stratum) + metrics."""

    tx: str
    outcome: str | None
    phase: str
    fold: int
    stratum: str
    metrics: dict[str, float | None] = field(default_factory=dict)
    reasons: dict[str, str] = field(default_factory=dict)


def _classification_metrics(p: NDArray, y: NDArray) -> tuple[dict, dict]:
    values: dict[str, float | None] = {name: None for name in METRIC_COLUMNS}
    reasons: dict[str, str] = {}
    pred = p >= THRESHOLD
    actual = y == 1.0
    tp = float(np.sum(pred & actual))
    tn = float(np.sum(~pred & ~actual))
    fp = float(np.sum(pred & ~actual))
    fn = float(np.sum(~pred & actual))
    n = float(len(y))

    values["tn"], values["fp"], values["fn"], values["tp"] = tn, fp, fn, tp
    values["accuracy"] = (tp + tn) / n
    values["zero_one_loss"] = 1.0 - values["accuracy"]
    values["brier_score"] = float(np.mean((p - y) ** 2))
    margins = 1.0 - (2.0 * y - 1.0) * (2.0 * p - 1.0)
    values["hinge_loss"] = float(np.mean(np.maximum(margins, 0.0)))

    if tp + fp > 0:
        values["precision"] = tp / (tp + fp)
    else:
        reasons["precision"] = "no predicted positives"
    if tp + fn > 0:
        values["recall"] = tp / (tp + fn)
    else:
        reasons["recall"] = "no positive labels"
    if values["precision"] is not None and values["recall"] is not None:
        denom = values["precision"] + values["recall"]
        if denom > 0:
            values["f1"] = 2.0 * values["precision"] * values["recall"] / denom
        else:
            reasons["f1"] = "precision and recall both zero"
    else:
        reasons["f1"] = "precision or recall undefined"

    mcc_denom = np.sqrt((tp + fp) * (tp + fn) * (tn + fp) * (tn + fn))
    if mcc_denom > 0:
        values["matthews_corrcoef"] = float((tp * tn - fp * fn) / mcc_denom)
    else:
        reasons["matthews_corrcoef"] = "degenerate confusion matrix"

    auc = roc_curve(p, y).summary
    if auc is not None:
        values["roc_auc"] = auc
    else:
        reasons["roc_auc"] = "single-class stratum"
    return values, reasons


def _regression_metrics(p: NDArray, y: NDArray) -> tuple[dict, dict]:
    values: dict[str, float | None] = {name: None for name in METRIC_COLUMNS}
    reasons: dict[str, str] = {}
    err = y - p
    values["mean_absolute_error"] = float(np.mean(np.abs(err)))
    values["mean_squared_error"] = float(np.mean(err**2))
    values["median_absolute_error"] = float(np.median(np.abs(err)))

    var_y = float(np.var(y))
    if var_y > 0:
        values["explained_variance"] = 1.0 - float(np.var(err)) / var_y
        values["r2"] = 1.0 - float(np.sum(err**2)) / float(np.sum((y - y.mean()) ** 2))
    else:
        reasons["explained_variance"] = "zero outcome variance"
        reasons["r2"] = "zero outcome variance"

    if (y < 0).any() or (p < 0).any():
        reasons["mean_squared_log_error"] = "negative values"
    else:
        values["mean_squared_log_error"] = float(np.mean((np.log1p(p) - np.log1p(y)) ** 2))
    return values, reasons


def metrics_table(
    predictions: NDArray,
    truth: NDArray,
    treatment: NDArray,
    phase: str,
    fold: int,
    tx: str = "1",
    outcome_name: str | None = None,
    target_kind: str = "binary",
) -> list[MetricsRecord]:
    """One record per treatment-arm stratum plus a pooled "overall" stratum.

    Binary targets get the classification block (0.5 threshold, ">=" tie
    rule, hinge on the 2p-1 decision value); continuous targets get the
    regression block. Degenerate strata keep their metrics missing with a
    reason code instead of failing.
    """
    predictions = np.asarray(predictions, dtype=float)
    truth = np.asarray(truth, dtype=float)
    treatment = np.asarray(treatment)
    if not (len(predictions) == len(truth) == len(treatment)):
        raise ParameterError("predictions, truth, and treatment must share a length")
    if target_kind not in ("binary", "continuous"):
        raise ParameterError(f"unknown target kind {target_kind!r}")

    records = []
    strata: list[tuple[str, NDArray]] = [
        ("0", np.flatnonzero(treatment == 0)),
        ("1", np.flatnonzero(treatment == 1)),
        ("overall", np.arange(len(treatment))),
    ]
    for name, rows in strata:
        if len(rows) == 0:
            records.append(
                MetricsRecord(
                    tx=tx,
                    outcome=outcome_name,
                    phase=phase,
                    fold=fold,
                    stratum=name,
                    metrics={m: None for m in METRIC_COLUMNS},
                    reasons={"all": "empty stratum"},
                )
            )
            continue
        p, y = predictions[rows], truth[rows]
        if target_kind == "binary":
            values, reasons = _classification_metrics(p, y)
        else:
            values, reasons = _regression_metrics(p, y)
        records.append(
            MetricsRecord(
                tx=tx,
                outcome=outcome_name,
                phase=phase,
                fold=fold,
                stratum=name,
                metrics=values,
                reasons=reasons,
            )
        )
    return records
