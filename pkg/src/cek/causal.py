"""Propensity estimation, weighting, matching, and doubly-robust outcome modeling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .cohort import CohortFrame, FoldPlan
from .errors import EmptySubsetError, LearnerError, ParameterError, PositivityError
from .learners import LearnerSpec, fit_learner
from .learners.forest import ForestModel, predict_forest

DEFAULT_CLIP_EPS = 1e-6


@dataclass(frozen=True)
class PropensityScores:
    """Per-sample Pr[A=1|X] with a note on the model that produced them."""

    scores: NDArray
    source: str


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative per-sample weights plus bookkeeping on clipping/truncation."""

    weights: NDArray
    kind: str  # "ipw" | "stabilized_ipw" | "matching"
    truncation: tuple[float, float] | None = None
    clip_count: int = 0
    truncation_count: int = 0


@dataclass(frozen=True)
class PotentialOutcomePredictions:
    """Predicted outcome under each arm for a set of cohort rows.

    ``row_index`` holds cohort positions; under the train phase each sample
    appears once per fold that trained on it, so rows are tagged with the fold
    whose model produced them.
    """

    y_hat: NDArray        # (rows, 2); column a = prediction under treatment a
    factual_arm: NDArray  # (rows,) observed treatment
    row_index: NDArray    # (rows,) cohort positions
    fold_of_row: NDArray  # (rows,) producing fold
    phase: str

    @property
    def factual(self) -> NDArray:
        return self.y_hat[np.arange(len(self.factual_arm)), self.factual_arm]


@dataclass(frozen=True)
class AteEstimate:
    value: float
    per_fold: NDArray
    std: float
    n_rows: int


@dataclass(frozen=True)
class PropensityFit:
    """Per-fold propensity models plus a refit on the full cohort."""

    folds: FoldPlan
    models: tuple
    full_model: object
    score_matrix: NDArray  # (n, k); column f = fold-f model applied to every sample
    oof: PropensityScores
    spec: LearnerSpec

    def phase_rows(self, fold: int, phase: str) -> NDArray:
        if phase == "train":
            return self.folds.train_index(fold)
        if phase == "validation":
            return self.folds.validation_index(fold)
        raise ParameterError(f"unknown phase {phase!r}")


@dataclass(frozen=True)
class OutcomeFit:
    """Per-fold doubly-robust outcome models plus a refit on the full cohort."""

    folds: FoldPlan
    models: tuple
    full_model: object
    spec: LearnerSpec
    counterfactual_inverse: bool


def _model_scores(model, X: NDArray) -> NDArray:
    if hasattr(model, "predict_proba"):
        return np.asarray(model.predict_proba(X), dtype=float)
    return np.asarray(model.predict(X), dtype=float)


def fit_propensity(frame: CohortFrame, spec: LearnerSpec, folds: FoldPlan) -> PropensityFit:
    """Fit one treatment model per training fold and assemble out-of-fold scores.

    Every fold model also scores its own training rows, so both train-phase
    and validation-phase evaluations can be sliced from ``score_matrix``.
    A full-cohort refit is kept for subset evaluation.
    """
    frame.require_two_arms()
    if folds.n != frame.n:
        raise ParameterError("fold plan does not match cohort size")

    n, k = frame.n, folds.k
    score_matrix = np.empty((n, k))
    models = []
    for fold in range(k):
        train_idx = folds.train_index(fold)
        labels = frame.treatment[train_idx].astype(float)
        if len(np.unique(labels)) < 2:
            raise LearnerError(fold, "treatment is constant in the training fold")
        try:
            model = fit_learner(spec, frame.covariates[train_idx], labels, salt=fold)
        except Exception as exc:  # surface the failing fold
            raise LearnerError(fold, str(exc)) from exc
        models.append(model)
        score_matrix[:, fold] = _model_scores(model, frame.covariates)

    full_model = fit_learner(spec, frame.covariates, frame.treatment.astype(float), salt=k)
    oof_scores = score_matrix[np.arange(n), folds.fold_of]
    return PropensityFit(
        folds=folds,
        models=tuple(models),
        full_model=full_model,
        score_matrix=score_matrix,
        oof=PropensityScores(scores=oof_scores, source=f"out-of-fold {spec.describe()}"),
        spec=spec,
    )


def clip_scores(scores: NDArray, eps: float = DEFAULT_CLIP_EPS) -> tuple[NDArray, int]:
    """Clip scores into [eps, 1-eps]; returns (clipped, number of clip events)."""
    scores = np.asarray(scores, dtype=float)
    clipped = np.clip(scores, eps, 1.0 - eps)
    return clipped, int(np.sum(clipped != scores))


def ipw_weights(
    scores: NDArray,
    treatment: NDArray,
    stabilized: bool = False,
    truncation: tuple[float, float] | None = None,
    eps: float = DEFAULT_CLIP_EPS,
) -> WeightVector:
    """Inverse-probability-of-treatment weights: 1/p for treated, 1/(1-p) for control.

    Stabilized weights multiply by the prevalence of the sample's own arm.
    Scores are clipped into [eps, 1-eps] first; clip and truncation event
    counts are carried on the result rather than raised.
    """
    scores = np.asarray(getattr(scores, "scores", scores), dtype=float)
    treatment = np.asarray(treatment)
    p, clip_count = clip_scores(scores, eps)
    treated = treatment == 1
    weights = np.where(treated, 1.0 / p, 1.0 / (1.0 - p))
    if stabilized:
        prevalence = float(treated.mean())
        weights = weights * np.where(treated, prevalence, 1.0 - prevalence)
    truncation_count = 0
    if truncation is not None:
        lo, hi = truncation
        if lo > hi:
            raise ParameterError("truncation bounds must satisfy w_min <= w_max")
        clamped = np.clip(weights, lo, hi)
        truncation_count = int(np.sum(clamped != weights))
        weights = clamped
    return WeightVector(
        weights=weights,
        kind="stabilized_ipw" if stabilized else "ipw",
        truncation=truncation,
        clip_count=clip_count,
        truncation_count=truncation_count,
    )


def match_by_propensity(
    scores: NDArray, treatment: NDArray, caliper: float | None = None
) -> WeightVector:
    """Greedy 1:1 nearest-neighbor matching without replacement on |p_i - p_j|.

    Treated samples are processed in descending propensity order (hardest to
    match first, ties broken by sample position); a pair beyond the caliper is
    left unmatched. Matched samples get weight 1, everyone else 0.
    """
    scores = np.asarray(getattr(scores, "scores", scores), dtype=float)
    treatment = np.asarray(treatment)
    treated_idx = np.flatnonzero(treatment == 1)
    control_idx = np.flatnonzero(treatment != 1)
    if len(treated_idx) == 0 or len(control_idx) == 0:
        raise PositivityError("matching requires samples in both arms")

    # Descending propensity, position as tiebreak: sort on (-score, index).
    order = np.lexsort((treated_idx, -scores[treated_idx]))
    control_scores = scores[control_idx]
    available = np.ones(len(control_idx), dtype=bool)
    weights = np.zeros(len(scores))
    limit = np.inf if caliper is None else float(caliper)

    for t in treated_idx[order]:
        if not available.any():
            break
        gaps = np.abs(control_scores - scores[t])
        gaps[~available] = np.inf
        best = int(np.argmin(gaps))
        if gaps[best] <= limit:
            weights[t] = 1.0
            weights[control_idx[best]] = 1.0
            available[best] = False

    return WeightVector(weights=weights, kind="matching", truncation=None)


def inverse_arm_probability(scores: NDArray, arm: int, eps: float = DEFAULT_CLIP_EPS) -> NDArray:
    """1 / Pr[A = arm | X] from treated-arm scores, after eps clipping."""
    p, _ = clip_scores(scores, eps)
    return 1.0 / p if arm == 1 else 1.0 / (1.0 - p)


def _augmented_design(
    X: NDArray, arm_values: NDArray, scores: NDArray, counterfactual_inverse: bool,
    observed_arm: NDArray | None = None,
) -> NDArray:
    """Design [X, A, 1/Pr[A=a|X]] where a is the arm being predicted.

    With ``counterfactual_inverse=False`` the inverse-propensity feature is
    pinned to the observed arm instead (config-exposed alternative).
    """
    arm_values = np.broadcast_to(np.asarray(arm_values, dtype=float), (len(X),))
    feature_arm = arm_values if counterfactual_inverse else np.asarray(observed_arm, dtype=float)
    p, _ = clip_scores(scores)
    inv = np.where(feature_arm == 1, 1.0 / p, 1.0 / (1.0 - p))
    return np.column_stack([X, arm_values, inv])


def fit_doubly_robust(
    frame: CohortFrame,
    propensity_fit: PropensityFit,
    spec: LearnerSpec,
    folds: FoldPlan | None = None,
    counterfactual_inverse: bool = True,
) -> OutcomeFit:
    """Fit per-fold outcome models on [X, A, inverse propensity of the observed arm].

    Each fold reuses its own propensity model to build the augmentation, both
    here and later for validation rows.
    """
    folds = folds or propensity_fit.folds
    if folds is not propensity_fit.folds and not np.array_equal(
        folds.fold_of, propensity_fit.folds.fold_of
    ):
        raise ParameterError("outcome folds must match the propensity fold plan")

    models = []
    for fold in range(folds.k):
        rows = folds.train_index(fold)
        design = _augmented_design(
            frame.covariates[rows],
            frame.treatment[rows],
            propensity_fit.score_matrix[rows, fold],
            counterfactual_inverse=True,  # factual rows: both conventions coincide
            observed_arm=frame.treatment[rows],
        )
        try:
            models.append(fit_learner(spec, design, frame.outcome[rows], salt=1000 + fold))
        except Exception as exc:
            raise LearnerError(fold, str(exc)) from exc

    full_design = _augmented_design(
        frame.covariates,
        frame.treatment,
        _model_scores(propensity_fit.full_model, frame.covariates),
        counterfactual_inverse=True,
        observed_arm=frame.treatment,
    )
    full_model = fit_learner(spec, full_design, frame.outcome, salt=1000 + folds.k)
    return OutcomeFit(
        folds=folds,
        models=tuple(models),
        full_model=full_model,
        spec=spec,
        counterfactual_inverse=counterfactual_inverse,
    )


def predict_potential_outcomes(
    outcome_fit: OutcomeFit,
    frame: CohortFrame,
    propensity_fit: PropensityFit,
    phase: str = "validation",
    oob_factual: bool = False,
) -> PotentialOutcomePredictions:
    """Predict the outcome under both arms for every row of the requested phase.

    Rows are routed to the model of their validation fold (validation phase)
    or to each model trained on them (train phase). ``oob_factual`` replaces
    the factual column with out-of-bag predictions; it needs a forest outcome
    model and the train phase, mirroring honest-on-training evaluation.
    """
    if phase not in ("train", "validation"):
        raise ParameterError(f"unknown phase {phase!r}")
    folds = outcome_fit.folds
    if oob_factual:
        if phase != "train":
            raise ParameterError("oob_factual applies to the train phase only")
        if not isinstance(outcome_fit.models[0], ForestModel):
            raise ParameterError("oob_factual requires a forest outcome model")

    for fold in range(folds.k):
        train_arms = np.unique(frame.treatment[folds.train_index(fold)])
        if len(train_arms) < 2:
            missing = 1 - int(train_arms[0]) if len(train_arms) else "both"
            raise PositivityError(
                f"arm {missing} absent from fold {fold} training data; "
                "counterfactual prediction would extrapolate"
            )

    chunks_rows, chunks_fold, chunks_pred, chunks_arm = [], [], [], []
    for fold in range(folds.k):
        rows = propensity_fit.phase_rows(fold, phase)
        scores = propensity_fit.score_matrix[rows, fold]
        model = outcome_fit.models[fold]
        y_hat = np.empty((len(rows), 2))
        for arm in (0, 1):
            design = _augmented_design(
                frame.covariates[rows],
                np.full(len(rows), arm),
                scores,
                outcome_fit.counterfactual_inverse,
                observed_arm=frame.treatment[rows],
            )
            y_hat[:, arm] = _model_scores(model, design)
        if oob_factual:
            observed = frame.treatment[rows]
            design = _augmented_design(
                frame.covariates[rows],
                observed,
                scores,
                counterfactual_inverse=True,
                observed_arm=observed,
            )
            positions = np.arange(len(rows))  # train rows in training order
            oob = predict_forest(model, design, mode="oob", train_index=positions)
            replace = ~np.isnan(oob)
            y_hat[positions[replace], observed[replace]] = oob[replace]
            if not replace.all():
                warnings.warn(
                    f"{int((~replace).sum())} sample(s) had an empty out-of-bag "
                    "tree set; kept regular predictions for them",
                    stacklevel=2,
                )
        chunks_rows.append(rows)
        chunks_fold.append(np.full(len(rows), fold))
        chunks_pred.append(y_hat)
        chunks_arm.append(frame.treatment[rows])

    return PotentialOutcomePredictions(
        y_hat=np.concatenate(chunks_pred),
        factual_arm=np.concatenate(chunks_arm),
        row_index=np.concatenate(chunks_rows),
        fold_of_row=np.concatenate(chunks_fold),
        phase=phase,
    )


def predict_potential_outcomes_full(
    outcome_fit: OutcomeFit,
    frame: CohortFrame,
    propensity_fit: PropensityFit,
    rows: NDArray | None = None,
) -> PotentialOutcomePredictions:
    """Potential outcomes from the whole-data refits, for subset evaluation."""
    rows = np.arange(frame.n) if rows is None else np.asarray(rows)
    arms = np.unique(frame.treatment[rows])
    scores = _model_scores(propensity_fit.full_model, frame.covariates[rows])
    y_hat = np.empty((len(rows), 2))
    for arm in (0, 1):
        design = _augmented_design(
            frame.covariates[rows],
            np.full(len(rows), arm),
            scores,
            outcome_fit.counterfactual_inverse,
            observed_arm=frame.treatment[rows],
        )
        y_hat[:, arm] = _model_scores(outcome_fit.full_model, design)
    return PotentialOutcomePredictions(
        y_hat=y_hat,
        factual_arm=frame.treatment[rows],
        row_index=rows,
        fold_of_row=np.zeros(len(rows), dtype=np.int64),
        phase="full",
    )


def estimate_ate(
    po: PotentialOutcomePredictions, mask: NDArray | None = None
) -> AteEstimate:
    """mean(y_hat under treatment) - mean(y_hat under control) over selected rows.

    ``mask`` selects cohort samples (length n over the cohort); per-fold
    estimates and their cross-fold standard deviation come along for free.
    """
    if mask is None:
        keep = np.ones(len(po.row_index), dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
        keep = mask[po.row_index]
    if not keep.any():
        raise EmptySubsetError("ATE mask selects no rows")

    effect = po.y_hat[:, 1] - po.y_hat[:, 0]
    per_fold = []
    for fold in np.unique(po.fold_of_row):
        sel = keep & (po.fold_of_row == fold)
        if sel.any():
            per_fold.append(float(effect[sel].mean()))
    per_fold = np.array(per_fold)
    return AteEstimate(
        value=float(effect[keep].mean()),
        per_fold=per_fold,
        std=float(per_fold.std()) if len(per_fold) > 1 else 0.0,
        n_rows=int(keep.sum()),
    )
