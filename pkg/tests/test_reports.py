import csv

import numpy as np
import pytest

from cek import LearnerSpec, SynthConfig, generate, make_folds
from cek.causal import fit_propensity
from cek.evaluation import balance_report, metrics_table, weight_vectors_for_folds
from cek.reports import (
    emit_metrics_csv,
    emit_smd_csv,
    emit_weights_csv,
    format_value,
    parse_metrics_csv,
)


def sample_records(k=5):
    rng = np.random.default_rng(0)
    records = []
    for phase in ("train", "validation"):
        for fold in range(k):
            records.extend(
                metrics_table(
                    rng.random(60),
                    (rng.random(60) < 0.5).astype(float),
                    (rng.random(60) < 0.5).astype(int),
                    phase=phase,
                    fold=fold,
                    tx="treatment",
                    outcome_name="outcome",
                )
            )
    return records


class TestFormatValue:
    def test_none_is_empty(self):
        assert format_value(None) == ""

    def test_inf_sentinel(self):
        assert format_value(float("inf")) == "inf"

    def test_round_trip_exact(self):
        for v in (0.1, 1 / 3, 1e-17, 123456.789012345):
            assert float(format_value(v)) == v

    def test_integral_floats_compact(self):
        assert format_value(25.0) == "25"


class TestMetricsCsv:
    def test_outcome_kind_keeps_o_column(self, tmp_path):
        records = sample_records(k=1)[:3]
        path = tmp_path / "m.csv"
        emit_metrics_csv(records, "outcome", path)
        rows = list(csv.reader(open(path)))
        assert rows[0][:5] == ["TX", "O", "phase", "fold", "stratum"]
        assert rows[1][1] == "outcome"

    def test_propensity_kind_omits_o_column(self, tmp_path):
        records = sample_records(k=1)[:3]
        path = tmp_path / "m.csv"
        emit_metrics_csv(records, "propensity", path)
        rows = list(csv.reader(open(path)))
        assert "O" not in rows[0]
        assert rows[0][:4] == ["TX", "phase", "fold", "stratum"]

    def test_row_count_5x2x3(self, tmp_path):
        records = sample_records(k=5)
        path = tmp_path / "m.csv"
        emit_metrics_csv(records, "outcome", path)
        assert len(list(csv.reader(open(path)))) - 1 == 30

    def test_round_trip_exact(self, tmp_path):
        records = sample_records(k=2)
        path = tmp_path / "m.csv"
        emit_metrics_csv(records, "outcome", path)
        back = parse_metrics_csv(path)
        assert len(back) == len(records)
        for a, b in zip(records, back):
            assert (a.tx, a.outcome, a.phase, a.fold, a.stratum) == (
                b.tx,
                b.outcome,
                b.phase,
                b.fold,
                b.stratum,
            )
            for name, value in a.metrics.items():
                if value is None:
                    assert b.metrics[name] is None
                else:
                    assert b.metrics[name] == float(value)


@pytest.fixture(scope="module")
def balance_setup():
    config = SynthConfig(
        n=600,
        d=10,
        propensity_coef=(0.5, -0.4, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        outcome_coef=(0.5, 0.4, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
        treatment_effect=0.3,
        seed=2,
    )
    frame, _ = generate(config)
    folds = make_folds(frame.n, 5, 0, treatment=frame.treatment)
    pfit = fit_propensity(frame, LearnerSpec(kind="logistic", l2=1.0), folds)
    wvs = weight_vectors_for_folds(pfit, frame, "ipw")
    table = balance_report(
        frame, [w.weights for w in wvs], folds, phase="both"
    )
    return frame, folds, table


class TestSmdCsv:
    def test_shape_10_covariates_20_value_columns(self, tmp_path, balance_setup):
        frame, folds, table = balance_setup
        path = tmp_path / "smd.csv"
        emit_smd_csv(table, {"tx": "treatment", "outcome": "outcome"}, path)
        rows = list(csv.reader(open(path)))
        assert len(rows) - 1 == 10
        assert len(rows[0]) == 4 + 4 * folds.k
        assert rows[0][:4] == ["TX", "O", "phase", "covariate"]

    def test_unit_weights_make_blocks_equal(self, tmp_path, balance_setup):
        frame, folds, _ = balance_setup
        ones = [np.ones(frame.n)] * folds.k
        table = balance_report(frame, ones, folds, phase="both")
        path = tmp_path / "smd.csv"
        emit_smd_csv(table, {}, path)
        rows = list(csv.reader(open(path)))
        k = folds.k
        for row in rows[1:]:
            values = row[4:]
            assert values[: 2 * k] == values[2 * k :]  # unweighted == weighted

    def test_inf_serialized_as_inf(self, tmp_path):
        frame, _ = generate(
            SynthConfig(
                n=40,
                d=2,
                propensity_coef=(0.5, 0.0),
                outcome_coef=(0.5, 0.0),
                treatment_effect=0.3,
                seed=3,
            )
        )
        # constant covariate with different means across arms is impossible;
        # force the sentinel by zeroing variance within arms
        doctored = frame.covariates.copy()
        doctored[:, 1] = frame.treatment  # zero variance per arm, unequal means
        frame = type(frame)(
            sample_ids=frame.sample_ids,
            covariates=doctored,
            covariate_names=frame.covariate_names,
            treatment=frame.treatment,
            outcome=frame.outcome,
            outcome_kind=frame.outcome_kind,
        )
        folds = make_folds(frame.n, 2, 0, treatment=frame.treatment)
        table = balance_report(
            frame, [np.ones(frame.n)] * 2, folds, phase="both"
        )
        path = tmp_path / "smd.csv"
        emit_smd_csv(table, {}, path)
        text = path.read_text()
        assert ",inf" in text


class TestWeightsCsv:
    def test_schema(self, tmp_path):
        path = tmp_path / "w.csv"
        emit_weights_csv(np.array([7, 8, 9]), np.array([1.5, 2.0, 1.0]), "ipw", path)
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["sample_id", "weight", "kind"]
        assert rows[1] == ["7", "1.5", "ipw"]
