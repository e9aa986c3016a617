"""Doubly-robust effect estimation with outcome diagnostics and subset checks.

The outcome model sees [covariates, treatment, inverse propensity of the
observed arm]; potential outcomes are predicted by switching the treatment
column. The effect is reported train-phase (the usual reporting convention)
with its cross-validation spread, and re-checked on a covariate-defined
subset against the oracle.
"""

import numpy as np

from cek import (
    LearnerSpec,
    SynthConfig,
    estimate_ate,
    fit_doubly_robust,
    fit_propensity,
    generate,
    make_folds,
    oracle_ate,
    predict_potential_outcomes,
)
from cek.evaluation import (
    EvalOptions,
    FittedArtifacts,
    evaluate_outcomes,
    evaluate_subset,
    weight_vectors_for_folds,
)

config = SynthConfig(
    n=8000,
    d=6,
    propensity_coef=(0.6, -0.5, 0.4, 0.0, 0.0, 0.0),
    outcome_coef=(0.8, 0.6, 0.4, 0.5, 0.0, 0.0),
    treatment_effect=0.45,
    outcome_intercept=-0.5,
    propensity_intercept=-0.2,
    seed=12,
)
frame, oracle = generate(config)
folds = make_folds(frame.n, 5, seed=0, treatment=frame.treatment)

pfit = fit_propensity(frame, LearnerSpec(kind="logistic", l2=1.0), folds)
ofit = fit_doubly_robust(frame, pfit, LearnerSpec(kind="logistic", l2=1.0))

for phase in ("train", "validation"):
    po = predict_potential_outcomes(ofit, frame, pfit, phase=phase)
    est = estimate_ate(po)
    print(f"{phase:<10} ATE {est.value:+.4f} +/- {est.std:.4f} "
          f"(per fold: {np.round(est.per_fold, 4).tolist()})")
print(f"oracle ATE {oracle.ate:+.4f}")

diag = evaluate_outcomes(frame, ofit, pfit, phase="validation")
print("\noutcome ROC by arm:",
      {a: round(s.summary_mean, 3) for a, s in diag.roc_by_arm.items()})
print(f"average precision: {diag.pr.summary_mean:.3f}")
print(f"ignorability violation score: {diag.ignorability.violation_score:.3f} "
      f"({diag.ignorability.populated_cells} populated cells)")

# Subset evaluation reuses the whole-data refits.
artifacts = FittedArtifacts(
    frame=frame,
    folds=folds,
    method="doubly_robust",
    propensity=pfit,
    weight_vectors=weight_vectors_for_folds(pfit, frame, "ipw"),
    outcome=ofit,
    options=EvalOptions(),
)
mask = frame.covariates[:, 0] > 0.5
sub = evaluate_subset(artifacts, frame, mask, descriptor="x0_high")
print(f"\nsubset x0>0.5: n={sub.n_selected}, arms={sub.arm_counts}")
print(f"subset ATE {sub.outcome.ate.value:+.4f} vs oracle "
      f"{oracle_ate(oracle, mask):+.4f}")
print(f"subset worst weighted SMD: "
      f"{max(r.weighted_mean for r in sub.propensity.balance.rows):.3f} "
      f"(flags: {list(sub.propensity.balance.flags)})")
