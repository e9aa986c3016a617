"""Byte-exact CSV report emitters for metrics, SMD tables, and weights."""

from __future__ import annotations

import csv
import math

import numpy as np
from numpy.typing import NDArray

from .causal import WeightVector
from .errors import ParameterError
from .evaluation.balance import BalanceTable
from .evaluation.metrics import METRIC_COLUMNS, MetricsRecord


def format_value(value) -> str:
    """Shortest round-trip float text; None becomes an empty field; inf stays 'inf'."""
    if value is None:
        return ""
    value = float(value)
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def emit_metrics_csv(records: list[MetricsRecord], kind: str, path) -> None:
    """One line per record with the fixed metric column order.

    ``kind="propensity"`` omits the outcome (O) column entirely, both in the
    header and in every row; missing metrics serialize as empty fields.
    """
    if kind not in ("propensity", "outcome"):
        raise ParameterError(f"unknown metrics kind {kind!r}")
    lead = ["TX", "phase", "fold", "stratum"] if kind == "propensity" else [
        "TX",
        "O",
        "phase",
        "fold",
        "stratum",
    ]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(lead + list(METRIC_COLUMNS))
        for record in records:
            head = [record.tx]
            if kind == "outcome":
                head.append(record.outcome if record.outcome is not None else "")
            head += [record.phase, str(record.fold), record.stratum]
            writer.writerow(head + [format_value(record.metrics[m]) for m in METRIC_COLUMNS])


def parse_metrics_csv(path) -> list[MetricsRecord]:
    """Inverse of :func:`emit_metrics_csv` (used by round-trip checks)."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        has_outcome = "O" in header
        records = []
        for row in reader:
            cursor = iter(row)
            tx = next(cursor)
            outcome = next(cursor) if has_outcome else None
            phase, fold, stratum = next(cursor), int(next(cursor)), next(cursor)
            metrics = {
                name: (float(cell) if cell != "" else None)
                for name, cell in zip(METRIC_COLUMNS, cursor)
            }
            records.append(
                MetricsRecord(
                    tx=tx,
                    outcome=outcome if outcome != "" else None,
                    phase=phase,
                    fold=fold,
                    stratum=stratum,
                    metrics=metrics,
                )
            )
    return records


def emit_smd_csv(table: BalanceTable, context: dict, path) -> None:
    """One line per covariate: train-fold SMDs then validation-fold SMDs,
    unweighted block first, then the weighted block (4*k value columns).

    ``context`` supplies the TX/O/phase labels; the non-finite sentinel
    serializes as "inf" so zero-variance mean shifts stay visible.
    """
    phases = [p for p in ("train", "validation") if p in table.phases]
    if not phases:
        raise ParameterError("balance table has no train/validation phases to emit")
    header = ["TX", "O", "phase", "covariate"]
    for block in ("unweighted", "weighted"):
        for phase in phases:
            header += [f"{block}_{phase}_fold{f}" for f in range(table.k)]
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in table.rows:
            cells = [
                context.get("tx", "1"),
                context.get("outcome", ""),
                context.get("phase", "cv"),
                row.covariate,
            ]
            for values in (row.unweighted, row.weighted):
                for phase in phases:
                    cells += [format_value(v) for v in values[phase]]
            writer.writerow(cells)


def emit_weights_csv(
    sample_ids: NDArray, weights: NDArray | WeightVector, kind: str, path
) -> None:
    weights = np.asarray(getattr(weights, "weights", weights), dtype=float)
    if len(sample_ids) != len(weights):
        raise ParameterError("sample_ids and weights must share a length")
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["sample_id", "weight", "kind"])
        for sid, w in zip(sample_ids, weights):
            writer.writerow([sid, format_value(float(w)), kind])
