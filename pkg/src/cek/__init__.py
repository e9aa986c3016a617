"""cek: evaluation toolkit for causal-inference models.

Cross-validated propensity, weighting, and outcome models with the full
diagnostic suite: covariate balance, probability calibration, positivity
checks, ROC variants (weighted, expected), ignorability scatter, detailed
metric tables, and deterministic CSV/JSON/SVG reports.
"""

__version__ = "0.1.0"

from .causal import (
    AteEstimate,
    OutcomeFit,
    PotentialOutcomePredictions,
    PropensityFit,
    PropensityScores,
    WeightVector,
    estimate_ate,
    fit_doubly_robust,
    fit_propensity,
    ipw_weights,
    match_by_propensity,
    predict_potential_outcomes,
    predict_potential_outcomes_full,
)
from .cohort import CohortFrame, FoldPlan, load_cohort, make_folds, subset
from .errors import (
    CekError,
    DegenerateCohortError,
    EmptySubsetError,
    IngestionError,
    LearnerError,
    ParameterError,
    PositivityError,
    SchemaError,
)
from .learners import (
    CalibratedModel,
    CalibrationMap,
    ForestModel,
    LearnerSpec,
    LinearModel,
    RidgeModel,
    calibrate_cv,
    fit_forest,
    fit_isotonic,
    fit_learner,
    fit_logistic,
    fit_ridge,
    fit_sigmoid_calibration,
    predict_forest,
)
from .pipeline import (
    PipelineConfig,
    SubsetRule,
    emit_figures,
    fit_artifacts,
    run_pipeline,
)
from .reports import emit_metrics_csv, emit_smd_csv, emit_weights_csv
from .synth import (
    PositivityRule,
    SynthConfig,
    SynthOracle,
    generate,
    oracle_ate,
    write_cohort_csv,
    write_oracle_csv,
)

__all__ = [
    "AteEstimate",
    "CalibratedModel",
    "CalibrationMap",
    "CekError",
    "CohortFrame",
    "DegenerateCohortError",
    "EmptySubsetError",
    "FoldPlan",
    "ForestModel",
    "IngestionError",
    "LearnerError",
    "LearnerSpec",
    "LinearModel",
    "OutcomeFit",
    "ParameterError",
    "PipelineConfig",
    "PositivityError",
    "PositivityRule",
    "PotentialOutcomePredictions",
    "PropensityFit",
    "PropensityScores",
    "RidgeModel",
    "SchemaError",
    "SubsetRule",
    "SynthConfig",
    "SynthOracle",
    "WeightVector",
    "calibrate_cv",
    "emit_figures",
    "emit_metrics_csv",
    "emit_smd_csv",
    "emit_weights_csv",
    "estimate_ate",
    "fit_artifacts",
    "fit_doubly_robust",
    "fit_forest",
    "fit_isotonic",
    "fit_learner",
    "fit_logistic",
    "fit_propensity",
    "fit_ridge",
    "fit_sigmoid_calibration",
    "generate",
    "ipw_weights",
    "load_cohort",
    "make_folds",
    "match_by_propensity",
    "oracle_ate",
    "predict_forest",
    "predict_potential_outcomes",
    "predict_potential_outcomes_full",
    "run_pipeline",
    "subset",
    "write_cohort_csv",
    "write_oracle_csv",
    "__version__",
]
