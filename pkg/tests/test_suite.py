import numpy as np
import pytest

from cek import LearnerSpec, SynthConfig, generate, make_folds
from cek.causal import fit_doubly_robust, fit_propensity
from cek.errors import EmptySubsetError, PositivityError
from cek.evaluation import (
    EvalOptions,
    FittedArtifacts,
    evaluate_outcomes,
    evaluate_propensity,
    evaluate_subset,
    weight_vectors_for_folds,
)


@pytest.fixture(scope="module")
def fitted():
    config = SynthConfig(
        n=1200,
        d=5,
        propensity_coef=(0.6, -0.5, 0.4, 0.0, 0.0),
        outcome_coef=(0.6, 0.4, 0.0, 0.4, 0.0),
        treatment_effect=0.4,
        seed=5,
    )
    frame, oracle = generate(config)
    folds = make_folds(frame.n, 4, 0, treatment=frame.treatment)
    pfit = fit_propensity(frame, LearnerSpec(kind="logistic", l2=1.0), folds)
    wvs = weight_vectors_for_folds(pfit, frame, "ipw")
    ofit = fit_doubly_robust(frame, pfit, LearnerSpec(kind="logistic", l2=1.0))
    artifacts = FittedArtifacts(
        frame=frame,
        folds=folds,
        method="ipw",
        propensity=pfit,
        weight_vectors=wvs,
        outcome=ofit,
        options=EvalOptions(),
    )
    return frame, oracle, artifacts


class TestEvaluatePropensity:
    def test_bundle_is_complete(self, fitted):
        frame, _, artifacts = fitted
        diag = evaluate_propensity(
            frame, artifacts.propensity, artifacts.weight_vectors, "validation"
        )
        assert diag.roc.kind == "roc"
        assert diag.weighted_roc.kind == "weighted_roc"
        assert diag.expected_roc.kind == "expected_roc"
        assert diag.calibration.kind == "calibration"
        assert len(diag.balance.rows) == frame.d
        # 4 folds x 3 strata
        assert len(diag.metrics) == 12

    def test_train_phase_uses_training_rows(self, fitted):
        frame, _, artifacts = fitted
        train = evaluate_propensity(
            frame, artifacts.propensity, artifacts.weight_vectors, "train"
        )
        val = evaluate_propensity(
            frame, artifacts.propensity, artifacts.weight_vectors, "validation"
        )
        # train-phase AUC exceeds validation on the same finite sample
        assert train.roc.summary_mean >= val.roc.summary_mean - 0.02

    def test_positivity_mask_cohort_length(self, fitted):
        frame, _, artifacts = fitted
        diag = evaluate_propensity(
            frame, artifacts.propensity, artifacts.weight_vectors, "validation"
        )
        assert diag.positivity_cohort_mask.shape == (frame.n,)


class TestEvaluateOutcomes:
    def test_binary_bundle(self, fitted):
        frame, _, artifacts = fitted
        diag = evaluate_outcomes(
            frame, artifacts.outcome, artifacts.propensity, "validation"
        )
        assert set(diag.roc_by_arm) == {0, 1}
        assert diag.pr is not None
        assert diag.accuracy is None  # binary outcome uses curves, not scatter
        assert 0.0 <= diag.ignorability.violation_score <= 1.0
        assert diag.ate.n_rows == frame.n

    def test_ate_recovers_truth_loosely(self, fitted):
        frame, oracle, artifacts = fitted
        diag = evaluate_outcomes(
            frame, artifacts.outcome, artifacts.propensity, "train"
        )
        assert diag.ate.value == pytest.approx(oracle.ate, abs=0.08)


class TestEvaluateSubset:
    def test_mask_all_equals_mask_none(self, fitted):
        frame, _, artifacts = fitted
        full = evaluate_subset(artifacts, frame, None, descriptor="all")
        masked = evaluate_subset(
            artifacts, frame, np.ones(frame.n, dtype=bool), descriptor="all"
        )
        assert full.n_selected == masked.n_selected == frame.n
        for a, b in zip(full.propensity.balance.rows, masked.propensity.balance.rows):
            assert a.covariate == b.covariate
            np.testing.assert_allclose(
                a.weighted["validation"], b.weighted["validation"]
            )
        assert full.outcome.ate.value == masked.outcome.ate.value

    def test_subset_row_counts_respected(self, fitted):
        frame, _, artifacts = fitted
        mask = frame.covariates[:, 0] > np.quantile(frame.covariates[:, 0], 0.72)
        sub = evaluate_subset(artifacts, frame, mask, descriptor="28pct")
        assert sub.n_selected == int(mask.sum())
        assert sub.propensity.balance.k == 1

    def test_empty_mask_is_error(self, fitted):
        frame, _, artifacts = fitted
        with pytest.raises(EmptySubsetError):
            evaluate_subset(artifacts, frame, np.zeros(frame.n, dtype=bool))

    def test_single_arm_mask_is_positivity_error(self, fitted):
        frame, _, artifacts = fitted
        with pytest.raises(PositivityError):
            evaluate_subset(artifacts, frame, frame.treatment == 1)

    def test_matching_artifacts_rederive_weights(self, fitted):
        frame, _, artifacts = fitted
        from dataclasses import replace

        match_artifacts = replace(artifacts, method="matching", caliper=0.1)
        mask = frame.covariates[:, 1] > 0
        sub = evaluate_subset(match_artifacts, frame, mask, descriptor="half")
        assert sub.n_selected == int(mask.sum())
