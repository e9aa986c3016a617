"""Cohort representation, CSV ingestion, fold planning, and subset selection."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import (
    DegenerateCohortError,
    EmptySubsetError,
    IngestionError,
    ParameterError,
    SchemaError,
)


@dataclass(frozen=True)
class CohortFrame:
    """Complete data matrix for one causal question: covariates, treatment, outcome.

    Immutable after construction; safe to share across parallel workers.
    Treatment labels are always remapped to {0, 1} on ingestion; the raw
    values are kept in ``treatment_levels`` (index = internal label).
    """

    sample_ids: NDArray            # (n,) opaque identifiers
    covariates: NDArray            # (n, d) float matrix
    covariate_names: tuple[str, ...]
    treatment: NDArray             # (n,) int labels in {0..K-1}
    outcome: NDArray               # (n,) float
    outcome_kind: str              # "binary" | "continuous"
    treatment_levels: tuple = ()   # raw treatment values, index = internal label

    def __post_init__(self):
        n = len(self.sample_ids)
        if self.covariates.shape != (n, len(self.covariate_names)):
            raise SchemaError(
                f"covariate matrix shape {self.covariates.shape} does not match "
                f"{n} samples x {len(self.covariate_names)} names"
            )
        if len(self.treatment) != n or len(self.outcome) != n:
            raise SchemaError("treatment/outcome length does not match sample count")
        if not np.isfinite(self.covariates).all():
            raise SchemaError("covariates contain non-finite values")
        if not np.isfinite(self.outcome).all():
            raise SchemaError("outcome contains non-finite values")
        if self.outcome_kind not in ("binary", "continuous"):
            raise SchemaError(f"unknown outcome_kind {self.outcome_kind!r}")
        if self.outcome_kind == "binary" and not np.isin(self.outcome, (0.0, 1.0)).all():
            raise SchemaError("binary outcome contains values other than 0 and 1")

    @property
    def n(self) -> int:
        return len(self.sample_ids)

    @property
    def d(self) -> int:
        return self.covariates.shape[1]

    def require_two_arms(self) -> None:
        """Raise unless both treatment arms are present (causal-method gate)."""
        if len(np.unique(self.treatment)) < 2:
            raise DegenerateCohortError(
                "treatment has fewer than 2 observed levels; nothing to compare"
            )

    def arm_counts(self) -> dict[int, int]:
        values, counts = np.unique(self.treatment, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of each sample to one cross-validation fold."""

    fold_of: NDArray   # (n,) int fold index per sample
    k: int
    seed: int
    stratified: bool

    def __post_init__(self):
        if self.fold_of.min() < 0 or self.fold_of.max() >= self.k:
            raise ParameterError("fold indices out of range")
        if len(np.unique(self.fold_of)) != self.k:
            raise ParameterError("every fold must be nonempty")

    @property
    def n(self) -> int:
        return len(self.fold_of)

    def validation_index(self, fold: int) -> NDArray:
        return np.flatnonzero(self.fold_of == fold)

    def train_index(self, fold: int) -> NDArray:
        return np.flatnonzero(self.fold_of != fold)


def _parse_numeric_column(rows: list[list[str]], col_idx: int, name: str) -> NDArray:
    out = np.empty(len(rows))
    for i, row in enumerate(rows):
        cell = row[col_idx].strip() if col_idx < len(row) else ""
        if cell == "":
            raise IngestionError(i + 1, name, "missing value")
        try:
            out[i] = float(cell)
        except ValueError:
            raise IngestionError(i + 1, name, f"non-numeric value {cell!r}") from None
    if not np.isfinite(out).all():
        bad = int(np.flatnonzero(~np.isfinite(out))[0])
        raise IngestionError(bad + 1, name, "non-finite value")
    return out


def load_cohort(
    path,
    treatment_col: str,
    outcome_col: str,
    covariate_cols="rest",
    id_col: str | None = None,
    outcome_kind: str | None = None,
) -> CohortFrame:
    """Read a cohort from a headered CSV file.

    Args:
        path: CSV file with a header row, UTF-8, '.' decimal separator.
        treatment_col: column holding the treatment label (two distinct integers).
        outcome_col: column holding the outcome.
        covariate_cols: explicit list of covariate columns, or ``"rest"`` to use
            every remaining column (original order preserved).
        id_col: optional sample-identifier column; defaults to 0..n-1.
        outcome_kind: force ``"binary"`` or ``"continuous"``; inferred when None.

    Raises:
        SchemaError: a named column is absent.
        IngestionError: a cell is missing or non-numeric (reports 1-based data row).
        DegenerateCohortError: treatment has fewer than two observed levels.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, expected a header row") from None
        rows = [r for r in reader if r and any(cell.strip() for cell in r)]

    header = [h.strip() for h in header]
    positions = {name: i for i, name in enumerate(header)}

    for role, name in (("treatment", treatment_col), ("outcome", outcome_col)):
        if name not in positions:
            raise SchemaError(f"{role} column {name!r} not found; header has {header}")
    if id_col is not None and id_col not in positions:
        raise SchemaError(f"id column {id_col!r} not found; header has {header}")

    reserved = {treatment_col, outcome_col} | ({id_col} if id_col else set())
    if covariate_cols == "rest":
        covariate_names = [h for h in header if h not in reserved]
    else:
        covariate_names = list(covariate_cols)
        for name in covariate_names:
            if name not in positions:
                raise SchemaError(f"covariate column {name!r} not found; header has {header}")
    if not covariate_names:
        raise SchemaError("schema selects no covariate columns")

    if not rows:
        raise SchemaError(f"{path}: no data rows")

    treatment_raw = _parse_numeric_column(rows, positions[treatment_col], treatment_col)
    outcome = _parse_numeric_column(rows, positions[outcome_col], outcome_col)
    covariates = np.column_stack(
        [_parse_numeric_column(rows, positions[name], name) for name in covariate_names]
    )

    if not np.equal(treatment_raw, np.round(treatment_raw)).all():
        raise SchemaError(f"treatment column {treatment_col!r} contains non-integer values")
    levels = np.unique(treatment_raw)
    if len(levels) < 2:
        raise DegenerateCohortError(
            f"treatment column {treatment_col!r} has a single level {levels[0]:g}"
        )
    if len(levels) > 2:
        raise DegenerateCohortError(
            f"treatment column {treatment_col!r} has {len(levels)} levels; v1 supports 2"
        )
    # Larger raw value maps to the treated arm (1).
    treatment = (treatment_raw == levels[1]).astype(np.int64)

    if id_col is not None:
        sample_ids = np.array([row[positions[id_col]].strip() for row in rows], dtype=object)
    else:
        sample_ids = np.arange(len(rows))

    if outcome_kind is None:
        outcome_kind = "binary" if np.isin(outcome, (0.0, 1.0)).all() else "continuous"

    return CohortFrame(
        sample_ids=sample_ids,
        covariates=covariates,
        covariate_names=tuple(covariate_names),
        treatment=treatment,
        outcome=outcome,
        outcome_kind=outcome_kind,
        treatment_levels=tuple(int(v) for v in levels),
    )


def make_folds(
    n: int,
    k: int,
    seed: int,
    treatment: NDArray | None = None,
    stratified: bool = True,
) -> FoldPlan:
    """Partition ``n`` samples into ``k`` cross-validation folds.

    Stratified plans deal each treatment arm round-robin across folds (with a
    fold pointer carried between arms so every fold is populated), which keeps
    per-fold arm counts within one sample of proportional allocation.
    Deterministic for fixed (n, k, seed, treatment).
    """
    if k < 2 or k > n:
        raise ParameterError(f"fold count k={k} must satisfy 2 <= k <= n={n}")
    if stratified and treatment is None:
        raise ParameterError("stratified folds require treatment labels")

    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    if stratified:
        treatment = np.asarray(treatment)
        if len(treatment) != n:
            raise ParameterError("treatment labels must have length n")
        pointer = 0
        for arm in np.unique(treatment):
            members = np.flatnonzero(treatment == arm)
            members = rng.permutation(members)
            for idx in members:
                fold_of[idx] = pointer % k
                pointer += 1
    else:
        order = rng.permutation(n)
        for pos, idx in enumerate(order):
            fold_of[idx] = pos % k
    return FoldPlan(fold_of=fold_of, k=k, seed=seed, stratified=stratified)


def subset(frame: CohortFrame, mask: NDArray) -> CohortFrame:
    """Restrict a cohort to the samples selected by a boolean mask.

    Column order is preserved. Warns (rather than fails) when a treatment arm
    is lost, since non-causal diagnostics remain meaningful on one arm.
    """
    mask = np.asarray(mask, dtype=bool)
    if len(mask) != frame.n:
        raise ParameterError(f"mask length {len(mask)} does not match n={frame.n}")
    if not mask.any():
        raise EmptySubsetError("subset mask selects no samples")

    selected_treatment = frame.treatment[mask]
    arms = np.unique(selected_treatment)
    if len(arms) < 2:
        warnings.warn(
            f"subset keeps a single treatment arm ({arms[0]}); causal methods "
            "will refuse this frame",
            stacklevel=2,
        )

    return CohortFrame(
        sample_ids=frame.sample_ids[mask],
        covariates=frame.covariates[mask],
        covariate_names=frame.covariate_names,
        treatment=selected_treatment,
        outcome=frame.outcome[mask],
        outcome_kind=frame.outcome_kind,
        treatment_levels=frame.treatment_levels,
    )
