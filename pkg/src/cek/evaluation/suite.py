"""Bundled diagnostics for a fitted causal analysis, including subset reruns."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from ..causal import (
    AteEstimate,
    OutcomeFit,
    PotentialOutcomePredictions,
    PropensityFit,
    WeightVector,
    estimate_ate,
    ipw_weights,
    match_by_propensity,
    predict_potential_outcomes,
    predict_potential_outcomes_full,
    _model_scores,
)
from ..cohort import CohortFrame, FoldPlan
from ..errors import EmptySubsetError, ParameterError, PositivityError
from .balance import BalanceTable, balance_report
from .calibration_curve import calibration_curve
from .curves import CurveSeries, pool_folds, pr_curve, roc_curve, expected_roc
from .metrics import MetricsRecord, metrics_table
from .positivity import DistributionSeries, PositivityReport, positivity_flag, propensity_distribution
from .scatter import AccuracyScatter, IgnorabilityReport, accuracy_scatter, counterfactual_scatter


@dataclass(frozen=True)
class EvalOptions:
    """Knobs for every diagnostic; defaults follow the report conventions."""

    calibration_bins: int = 10
    calibration_strategy: str = "bins"
    window_width: int | None = None
    distribution_bins: int = 20
    distribution_min_count: int = 10
    distribution_mode: str = "pdf_reflected"
    ignorability_grid: int = 10
    ignorability_min_cell: int = 5
    smd_threshold: float = 0.1
    clip_eps: float = 1e-6

    @classmethod
    def from_dict(cls, raw: dict) -> "EvalOptions":
        unknown = set(raw) - set(cls.__dataclass_fields__)
        if unknown:
            raise ParameterError(f"unknown evaluation options: {sorted(unknown)}")
        return cls(**raw)


@dataclass(frozen=True)
class PropensityDiagnostics:
    """Everything the propensity panel needs for one phase."""

    phase: str
    balance: BalanceTable
    roc: CurveSeries
    weighted_roc: CurveSeries
    expected_roc: CurveSeries
    calibration: CurveSeries
    distribution: DistributionSeries
    positivity: PositivityReport
    positivity_cohort_mask: NDArray
    metrics: list[MetricsRecord] = field(default_factory=list)


@dataclass(frozen=True)
class OutcomeDiagnostics:
    """Factual-accuracy and ignorability diagnostics for one phase."""

    phase: str
    po: PotentialOutcomePredictions
    ate: AteEstimate
    ignorability: IgnorabilityReport
    roc_by_arm: dict[int, CurveSeries] | None = None
    calibration: CurveSeries | None = None
    pr: CurveSeries | None = None
    accuracy: AccuracyScatter | None = None
    residuals: AccuracyScatter | None = None
    metrics: list[MetricsRecord] = field(default_factory=list)


@dataclass(frozen=True)
class FittedArtifacts:
    """A fitted analysis ready for diagnostics: models, weights, and options."""

    frame: CohortFrame
    folds: FoldPlan
    method: str  # "ipw" | "matching" | "doubly_robust"
    propensity: PropensityFit
    weight_vectors: tuple[WeightVector, ...]
    outcome: OutcomeFit | None
    options: EvalOptions
    tx_label: str = "1"
    outcome_label: str = "outcome"
    stabilized: bool = False
    truncation: tuple[float, float] | None = None
    caliper: float | None = None

    def derive_weights(self, scores: NDArray, treatment: NDArray) -> WeightVector:
        """Same weighting rule as the fitted analysis, applied to new scores."""
        if self.method == "matching":
            return match_by_propensity(scores, treatment, caliper=self.caliper)
        return ipw_weights(
            scores,
            treatment,
            stabilized=self.stabilized,
            truncation=self.truncation,
            eps=self.options.clip_eps,
        )


def weight_vectors_for_folds(
    pfit: PropensityFit,
    frame: CohortFrame,
    method: str,
    stabilized: bool = False,
    truncation: tuple[float, float] | None = None,
    caliper: float | None = None,
    clip_eps: float = 1e-6,
) -> tuple[WeightVector, ...]:
    """One cohort-wide weight vector per fold, from that fold's scores."""
    out = []
    for fold in range(pfit.folds.k):
        scores = pfit.score_matrix[:, fold]
        if method == "matching":
            out.append(match_by_propensity(scores, frame.treatment, caliper=caliper))
        else:
            out.append(
                ipw_weights(
                    scores,
                    frame.treatment,
                    stabilized=stabilized,
                    truncation=truncation,
                    eps=clip_eps,
                )
            )
    return tuple(out)


def _single_fold_plan(n: int) -> FoldPlan:
    return FoldPlan(fold_of=np.zeros(n, dtype=np.int64), k=1, seed=0, stratified=False)


def evaluate_propensity(
    frame: CohortFrame,
    pfit: PropensityFit,
    weight_vectors: tuple[WeightVector, ...],
    phase: str,
    options: EvalOptions = EvalOptions(),
    tx_label: str = "1",
) -> PropensityDiagnostics:
    """Assemble the full propensity panel for one phase.

    Per-fold curves pool via the shared grid; the distribution and positivity
    report run on the concatenated phase rows, and the sample-level suspect
    mask aggregates over folds by "flagged anywhere".
    """
    folds = pfit.folds
    balance = balance_report(
        frame,
        [wv.weights for wv in weight_vectors],
        folds,
        phase=phase,
        threshold=options.smd_threshold,
    )

    roc_folds, wroc_folds, expected_folds, cal_folds = [], [], [], []
    metrics: list[MetricsRecord] = []
    all_rows, all_scores = [], []
    for fold in range(folds.k):
        rows = pfit.phase_rows(fold, phase)
        scores = pfit.score_matrix[rows, fold]
        labels = frame.treatment[rows].astype(float)
        weights = weight_vectors[fold].weights[rows]
        roc_folds.append(roc_curve(scores, labels))
        wroc_folds.append(roc_curve(scores, labels, weights))
        expected_folds.append(expected_roc(scores))
        cal_folds.append(
            calibration_curve(
                scores,
                labels,
                strategy=options.calibration_strategy,
                resolution=options.calibration_bins,
                window_width=options.window_width,
            )
        )
        metrics.extend(
            metrics_table(
                scores,
                labels,
                frame.treatment[rows],
                phase=phase,
                fold=fold,
                tx=tx_label,
                outcome_name=None,
                target_kind="binary",
            )
        )
        all_rows.append(rows)
        all_scores.append(scores)

    rows_cat = np.concatenate(all_rows)
    scores_cat = np.concatenate(all_scores)
    distribution = propensity_distribution(
        scores_cat,
        frame.treatment[rows_cat],
        mode=options.distribution_mode,
        bin_count=options.distribution_bins,
        min_count=options.distribution_min_count,
    )
    positivity = positivity_flag(distribution)
    cohort_mask = np.zeros(frame.n, dtype=bool)
    np.logical_or.at(cohort_mask, rows_cat, positivity.mask)

    return PropensityDiagnostics(
        phase=phase,
        balance=balance,
        roc=pool_folds(roc_folds),
        weighted_roc=pool_folds(wroc_folds),
        expected_roc=pool_folds(expected_folds),
        calibration=pool_folds(cal_folds),
        distribution=distribution,
        positivity=positivity,
        positivity_cohort_mask=cohort_mask,
        metrics=metrics,
    )


def _outcome_curves(
    po: PotentialOutcomePredictions,
    frame: CohortFrame,
    options: EvalOptions,
    tx_label: str,
    outcome_label: str,
) -> dict:
    """Factual-prediction curves and metric records, fold by fold."""
    out: dict = {"metrics": [], "roc_by_arm": None, "calibration": None, "pr": None}
    factual = po.factual
    observed = frame.outcome[po.row_index]
    arm = po.factual_arm

    if frame.outcome_kind == "binary":
        roc_by_arm: dict[int, list] = {0: [], 1: []}
        cal_folds, pr_folds = [], []
        for fold in np.unique(po.fold_of_row):
            sel = po.fold_of_row == fold
            for a in (0, 1):
                pick = sel & (arm == a)
                roc_by_arm[a].append(roc_curve(factual[pick], observed[pick]))
            cal_folds.append(
                calibration_curve(
                    np.clip(factual[sel], 0.0, 1.0),
                    observed[sel],
                    strategy=options.calibration_strategy,
                    resolution=options.calibration_bins,
                    window_width=options.window_width,
                )
            )
            pr_folds.append(pr_curve(factual[sel], observed[sel]))
            out["metrics"].extend(
                metrics_table(
                    factual[sel],
                    observed[sel],
                    arm[sel],
                    phase=po.phase,
                    fold=int(fold),
                    tx=tx_label,
                    outcome_name=outcome_label,
                    target_kind="binary",
                )
            )
        out["roc_by_arm"] = {a: pool_folds(c) for a, c in roc_by_arm.items()}
        out["calibration"] = pool_folds(cal_folds)
        out["pr"] = pool_folds(pr_folds)
    else:
        for fold in np.unique(po.fold_of_row):
            sel = po.fold_of_row == fold
            out["metrics"].extend(
                metrics_table(
                    factual[sel],
                    observed[sel],
                    arm[sel],
                    phase=po.phase,
                    fold=int(fold),
                    tx=tx_label,
                    outcome_name=outcome_label,
                    target_kind="continuous",
                )
            )
    return out


def evaluate_outcomes(
    frame: CohortFrame,
    outcome_fit: OutcomeFit,
    pfit: PropensityFit,
    phase: str,
    options: EvalOptions = EvalOptions(),
    tx_label: str = "1",
    outcome_label: str = "outcome",
    oob_factual: bool = False,
) -> OutcomeDiagnostics:
    """Outcome-model panel for one phase: factual accuracy plus ignorability."""
    po = predict_potential_outcomes(
        outcome_fit, frame, pfit, phase=phase, oob_factual=oob_factual
    )
    parts = _outcome_curves(po, frame, options, tx_label, outcome_label)
    ignorability = counterfactual_scatter(
        po,
        frame.treatment,
        grid=options.ignorability_grid,
        min_cell=options.ignorability_min_cell,
    )
    accuracy = residuals = None
    if frame.outcome_kind == "continuous":
        accuracy = accuracy_scatter(po, frame.outcome, frame.treatment)
        residuals = accuracy_scatter(po, frame.outcome, frame.treatment, residual_mode=True)
    return OutcomeDiagnostics(
        phase=phase,
        po=po,
        ate=estimate_ate(po),
        ignorability=ignorability,
        roc_by_arm=parts["roc_by_arm"],
        calibration=parts["calibration"],
        pr=parts["pr"],
        accuracy=accuracy,
        residuals=residuals,
        metrics=parts["metrics"],
    )


@dataclass(frozen=True)
class SubsetDiagnostics:
    """Whole-data models re-evaluated on a cohort slice."""

    descriptor: str
    mask: NDArray
    n_selected: int
    arm_counts: dict[int, int]
    propensity: PropensityDiagnostics
    outcome: OutcomeDiagnostics | None


def evaluate_subset(
    artifacts: FittedArtifacts,
    frame: CohortFrame,
    mask: NDArray | None,
    descriptor: str = "subset",
) -> SubsetDiagnostics:
    """Re-run every diagnostic on masked rows using the whole-data refits.

    The subset is treated as a single evaluation fold (std bands are zero).
    Raises when the mask is empty or strips out a treatment arm.
    """
    if mask is None:
        mask = np.ones(frame.n, dtype=bool)
    mask = np.asarray(mask, dtype=bool)
    if len(mask) != frame.n:
        raise ParameterError("subset mask length does not match the cohort")
    if not mask.any():
        raise EmptySubsetError(f"subset {descriptor!r} selects no samples")
    rows = np.flatnonzero(mask)
    arms, counts = np.unique(frame.treatment[rows], return_counts=True)
    if len(arms) < 2:
        raise PositivityError(
            f"subset {descriptor!r} removes a treatment arm entirely"
        )

    options = artifacts.options
    scores = _model_scores(artifacts.propensity.full_model, frame.covariates[rows])
    weights = artifacts.derive_weights(scores, frame.treatment[rows])

    sub_plan = _single_fold_plan(len(rows))
    sub_frame = CohortFrame(
        sample_ids=frame.sample_ids[rows],
        covariates=frame.covariates[rows],
        covariate_names=frame.covariate_names,
        treatment=frame.treatment[rows],
        outcome=frame.outcome[rows],
        outcome_kind=frame.outcome_kind,
        treatment_levels=frame.treatment_levels,
    )

    balance = balance_report(
        sub_frame, [weights.weights], sub_plan, phase="validation",
        threshold=options.smd_threshold,
    )
    labels = sub_frame.treatment.astype(float)
    distribution = propensity_distribution(
        scores,
        sub_frame.treatment,
        mode=options.distribution_mode,
        bin_count=options.distribution_bins,
        min_count=options.distribution_min_count,
    )
    positivity = positivity_flag(distribution)
    cohort_mask = np.zeros(frame.n, dtype=bool)
    cohort_mask[rows] = positivity.mask

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)  # single-fold std warnings
        prop_diag = PropensityDiagnostics(
            phase=descriptor,
            balance=balance,
            roc=pool_folds([roc_curve(scores, labels)]),
            weighted_roc=pool_folds([roc_curve(scores, labels, weights.weights)]),
            expected_roc=pool_folds([expected_roc(scores)]),
            calibration=pool_folds(
                [
                    calibration_curve(
                        scores,
                        labels,
                        strategy=options.calibration_strategy,
                        resolution=options.calibration_bins,
                        window_width=options.window_width,
                    )
                ]
            ),
            distribution=distribution,
            positivity=positivity,
            positivity_cohort_mask=cohort_mask,
            metrics=metrics_table(
                scores,
                labels,
                sub_frame.treatment,
                phase=descriptor,
                fold=0,
                tx=artifacts.tx_label,
                outcome_name=None,
                target_kind="binary",
            ),
        )

        outcome_diag = None
        if artifacts.outcome is not None:
            po = predict_potential_outcomes_full(
                artifacts.outcome, frame, artifacts.propensity, rows=rows
            )
            po = replace(po, phase=descriptor)
            parts = _outcome_curves(
                po, frame, options, artifacts.tx_label, artifacts.outcome_label
            )
            accuracy = residuals = None
            if frame.outcome_kind == "continuous":
                accuracy = accuracy_scatter(po, frame.outcome, frame.treatment)
                residuals = accuracy_scatter(
                    po, frame.outcome, frame.treatment, residual_mode=True
                )
            outcome_diag = OutcomeDiagnostics(
                phase=descriptor,
                po=po,
                ate=estimate_ate(po),
                ignorability=counterfactual_scatter(
                    po,
                    frame.treatment,
                    grid=options.ignorability_grid,
                    min_cell=options.ignorability_min_cell,
                ),
                roc_by_arm=parts["roc_by_arm"],
                calibration=parts["calibration"],
                pr=parts["pr"],
                accuracy=accuracy,
                residuals=residuals,
                metrics=parts["metrics"],
            )

    return SubsetDiagnostics(
        descriptor=descriptor,
        mask=mask,
        n_selected=len(rows),
        arm_counts={int(a): int(c) for a, c in zip(arms, counts)},
        propensity=prop_diag,
        outcome=outcome_diag,
    )
