"""The propensity panel: balance, calibration, distribution, and ROC variants.

This walks the weighting-model checks on a confounded cohort: raw covariates
are imbalanced, inverse-probability weights from a calibrated logistic model
restore balance, and the weighted ROC collapses to chance as it should when
weighting has removed treatment information.
"""

import numpy as np

from cek import LearnerSpec, SynthConfig, fit_propensity, generate, make_folds
from cek.evaluation import EvalOptions, evaluate_propensity, weight_vectors_for_folds

config = SynthConfig(
    n=5000,
    d=10,
    propensity_coef=(0.40, -0.35, 0.32, 0.30, 0.28, 0, 0, 0, 0, 0),
    outcome_coef=(0.6, 0.5, 0.4, 0, 0, 0.4, 0.3, 0, 0, 0),
    treatment_effect=0.4,
    propensity_intercept=-0.2,
    seed=9,
)
frame, oracle = generate(config)
folds = make_folds(frame.n, 5, seed=0, treatment=frame.treatment)

learner = LearnerSpec(kind="logistic", l2=1.0, calibration="sigmoid")
pfit = fit_propensity(frame, learner, folds)
weights = weight_vectors_for_folds(pfit, frame, "ipw")

diag = evaluate_propensity(frame, pfit, weights, phase="validation", options=EvalOptions())

print("=== covariate balance (Love-plot order) ===")
print(f"{'covariate':<10} {'raw SMD':>8} {'weighted':>9} {'flag':>5}")
for row in diag.balance.rows:
    print(f"{row.covariate:<10} {row.unweighted_mean:>8.3f} {row.weighted_mean:>9.3f} "
          f"{'*' if row.flagged else '':>5}")

print("\n=== ROC panel (pooled over validation folds) ===")
print(f"propensity AUC : {diag.roc.summary_mean:.3f} +/- {diag.roc.summary_std:.3f}")
print(f"expected AUC   : {diag.expected_roc.summary_mean:.3f}  "
      "(implied by the scores themselves)")
print(f"weighted AUC   : {diag.weighted_roc.summary_mean:.3f} +/- "
      f"{diag.weighted_roc.summary_std:.3f}  (chance = weights removed the bias)")

gap = float(np.abs(diag.roc.mean_y - diag.expected_roc.mean_y).max())
print(f"max gap between observed and expected ROC: {gap:.3f}")

print("\n=== calibration (first fold) ===")
fold = diag.calibration.folds[0]
print(f"{'predicted':>9} {'observed':>9} {'n':>5}   95%-style band")
for r, p, n, lo, hi in zip(
    fold.x, fold.y, fold.extras["n"], fold.extras["ci_low"], fold.extras["ci_high"]
):
    marker = "ok" if lo <= r <= hi else "off"
    print(f"{r:>9.3f} {p:>9.3f} {n:>5d}   [{lo:.3f}, {hi:.3f}] {marker}")

print(f"\npositivity suspects: {len(diag.positivity.suspect_bins)} bins, "
      f"flagged fraction by arm: { {k: round(v, 4) for k, v in diag.positivity.fraction_by_arm.items()} }")
