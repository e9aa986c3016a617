"""Diagnostics: balance, calibration, positivity, ROC variants, ignorability, metrics."""

from .balance import BalanceRow, BalanceTable, balance_report, smd, weighted_mean_var
from .calibration_curve import binomial_ci_bounds, calibration_curve
from .curves import (
    CurveSeries,
    FoldCurve,
    expected_roc,
    pool_folds,
    pr_curve,
    roc_curve,
)
from .metrics import METRIC_COLUMNS, MetricsRecord, metrics_table
from .positivity import (
    DistributionSeries,
    PositivityReport,
    positivity_flag,
    propensity_distribution,
)
from .scatter import (
    AccuracyScatter,
    IgnorabilityReport,
    accuracy_scatter,
    counterfactual_scatter,
)
from .suite import (
    EvalOptions,
    FittedArtifacts,
    OutcomeDiagnostics,
    PropensityDiagnostics,
    SubsetDiagnostics,
    evaluate_outcomes,
    evaluate_propensity,
    evaluate_subset,
    weight_vectors_for_folds,
)

__all__ = [
    "AccuracyScatter",
    "BalanceRow",
    "BalanceTable",
    "CurveSeries",
    "DistributionSeries",
    "EvalOptions",
    "FittedArtifacts",
    "FoldCurve",
    "IgnorabilityReport",
    "METRIC_COLUMNS",
    "MetricsRecord",
    "OutcomeDiagnostics",
    "PositivityReport",
    "PropensityDiagnostics",
    "SubsetDiagnostics",
    "accuracy_scatter",
    "balance_report",
    "binomial_ci_bounds",
    "calibration_curve",
    "counterfactual_scatter",
    "evaluate_outcomes",
    "evaluate_propensity",
    "evaluate_subset",
    "expected_roc",
    "metrics_table",
    "pool_folds",
    "positivity_flag",
    "pr_curve",
    "propensity_distribution",
    "roc_curve",
    "smd",
    "weight_vectors_for_folds",
    "weighted_mean_var",
]
