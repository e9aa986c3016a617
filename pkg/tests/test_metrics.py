import numpy as np
import pytest
import sklearn.metrics as skm

from cek.evaluation.metrics import METRIC_COLUMNS, metrics_table


def records_for(predictions, truth, treatment, target_kind="binary"):
    return metrics_table(
        predictions,
        truth,
        treatment,
        phase="validation",
        fold=0,
        tx="1",
        outcome_name="y" if target_kind else None,
        target_kind=target_kind,
    )


class TestStructure:
    def test_three_strata_per_call(self):
        rng = np.random.default_rng(0)
        recs = records_for(rng.random(20), (rng.random(20) < 0.5).astype(float), np.tile([0, 1], 10))
        assert [r.stratum for r in recs] == ["0", "1", "overall"]
        assert all(set(r.metrics) == set(METRIC_COLUMNS) for r in recs)

    def test_empty_stratum_reason_coded(self):
        recs = records_for(np.array([0.2, 0.8]), np.array([0.0, 1.0]), np.array([1, 1]))
        arm0 = recs[0]
        assert all(v is None for v in arm0.metrics.values())
        assert arm0.reasons == {"all": "empty stratum"}


class TestClassification:
    def test_perfect_predictions(self):
        p = np.array([0.9, 0.8, 0.1, 0.2])
        y = np.array([1.0, 1.0, 0.0, 0.0])
        rec = records_for(p, y, np.array([0, 1, 0, 1]))[2]
        assert rec.metrics["accuracy"] == 1.0
        assert rec.metrics["brier_score"] == pytest.approx(0.025)
        assert rec.metrics["matthews_corrcoef"] == pytest.approx(1.0)
        assert rec.metrics["roc_auc"] == 1.0
        assert rec.metrics["zero_one_loss"] == 0.0

    def test_all_half_scores_balanced_labels(self):
        p = np.full(10, 0.5)
        y = np.r_[np.ones(5), np.zeros(5)]
        rec = records_for(p, y, np.tile([0, 1], 5))[2]
        assert rec.metrics["brier_score"] == pytest.approx(0.25)
        # >= tie rule: everything predicted positive, accuracy = prevalence
        assert rec.metrics["accuracy"] == pytest.approx(0.5)
        assert rec.metrics["recall"] == 1.0

    def test_agrees_with_sklearn_on_random_data(self):
        rng = np.random.default_rng(1)
        p = rng.random(300)
        y = (rng.random(300) < 0.4).astype(float)
        pred = (p >= 0.5).astype(int)
        rec = records_for(p, y, (rng.random(300) < 0.5).astype(int))[2]
        assert rec.metrics["accuracy"] == pytest.approx(skm.accuracy_score(y, pred))
        assert rec.metrics["precision"] == pytest.approx(skm.precision_score(y, pred))
        assert rec.metrics["recall"] == pytest.approx(skm.recall_score(y, pred))
        assert rec.metrics["f1"] == pytest.approx(skm.f1_score(y, pred))
        assert rec.metrics["roc_auc"] == pytest.approx(skm.roc_auc_score(y, p))
        assert rec.metrics["brier_score"] == pytest.approx(skm.brier_score_loss(y, p))
        assert rec.metrics["matthews_corrcoef"] == pytest.approx(
            skm.matthews_corrcoef(y, pred)
        )
        assert rec.metrics["zero_one_loss"] == pytest.approx(skm.zero_one_loss(y, pred))
        assert rec.metrics["hinge_loss"] == pytest.approx(
            skm.hinge_loss(y, 2 * p - 1, labels=[0, 1])
        )
        tn, fp, fn, tp = skm.confusion_matrix(y, pred).ravel()
        assert (rec.metrics["tn"], rec.metrics["fp"], rec.metrics["fn"], rec.metrics["tp"]) == (
            tn,
            fp,
            fn,
            tp,
        )

    def test_single_class_stratum_reason_codes(self):
        p = np.array([0.9, 0.8, 0.7])
        y = np.ones(3)
        rec = records_for(p, y, np.array([1, 1, 1]))[1]
        assert rec.metrics["roc_auc"] is None
        assert rec.reasons["roc_auc"] == "single-class stratum"
        assert rec.metrics["matthews_corrcoef"] is None
        assert rec.metrics["accuracy"] == 1.0  # still defined

    def test_regression_fields_empty_for_binary(self):
        rec = records_for(np.array([0.2, 0.8]), np.array([0.0, 1.0]), np.array([0, 1]))[2]
        assert rec.metrics["mean_squared_error"] is None
        assert rec.metrics["r2"] is None


class TestRegression:
    def test_hand_instance(self):
        p = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        y = np.array([1.5, 2.0, 2.0, 5.0, 4.0])
        rec = records_for(p, y, np.array([0, 1, 0, 1, 0]), target_kind="continuous")[2]
        err = y - p
        assert rec.metrics["mean_absolute_error"] == pytest.approx(np.mean(np.abs(err)))
        assert rec.metrics["mean_squared_error"] == pytest.approx(np.mean(err**2))
        assert rec.metrics["median_absolute_error"] == pytest.approx(np.median(np.abs(err)))

    def test_agrees_with_sklearn(self):
        rng = np.random.default_rng(2)
        y = rng.random(100) * 3
        p = y + rng.normal(0, 0.3, 100)
        p = np.abs(p)
        rec = records_for(p, y, (rng.random(100) < 0.5).astype(int), target_kind="continuous")[2]
        assert rec.metrics["r2"] == pytest.approx(skm.r2_score(y, p))
        assert rec.metrics["explained_variance"] == pytest.approx(
            skm.explained_variance_score(y, p)
        )
        assert rec.metrics["mean_squared_log_error"] == pytest.approx(
            skm.mean_squared_log_error(y, p)
        )
        assert rec.metrics["median_absolute_error"] == pytest.approx(
            skm.median_absolute_error(y, p)
        )

    def test_msle_negative_values_reason_coded(self):
        rec = records_for(
            np.array([-1.0, 2.0]), np.array([1.0, 2.0]), np.array([0, 1]), "continuous"
        )[2]
        assert rec.metrics["mean_squared_log_error"] is None
        assert rec.reasons["mean_squared_log_error"] == "negative values"

    def test_classification_fields_empty_for_continuous(self):
        rec = records_for(
            np.array([1.0, 2.0]), np.array([1.0, 2.0]), np.array([0, 1]), "continuous"
        )[2]
        assert rec.metrics["accuracy"] is None
        assert rec.metrics["brier_score"] is None
