"""Config-driven pipeline: load, cross-fit, weight, evaluate, and emit reports."""

from __future__ import annotations

import hashlib
import json
import os
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .causal import fit_doubly_robust, fit_propensity
from .cohort import CohortFrame, load_cohort, make_folds
from .errors import ParameterError, SchemaError
from .evaluation.suite import (
    EvalOptions,
    FittedArtifacts,
    OutcomeDiagnostics,
    PropensityDiagnostics,
    evaluate_outcomes,
    evaluate_propensity,
    evaluate_subset,
    weight_vectors_for_folds,
)
from .figures import (
    accuracy_figure,
    balance_figure,
    curve_figure,
    distribution_figure,
    emit_figure,
    scatter_figure,
)
from .learners import LearnerSpec
from .reports import emit_metrics_csv, emit_smd_csv, emit_weights_csv

METHODS = ("ipw", "matching", "doubly_robust")
SUBSET_OPS = {
    ">": np.greater,
    ">=": np.greater_equal,
    "<": np.less,
    "<=": np.less_equal,
    "==": np.equal,
    "!=": np.not_equal,
}


def _reject_unknown(section: str, mapping: dict, allowed: set) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise SchemaError(f"unknown {section} keys: {sorted(unknown)}")


@dataclass(frozen=True)
class SubsetRule:
    """Named covariate predicate, e.g. age > 65."""

    column: str
    op: str
    value: float

    def mask(self, frame: CohortFrame) -> np.ndarray:
        if self.column not in frame.covariate_names:
            raise SchemaError(f"subset column {self.column!r} not in covariates")
        if self.op not in SUBSET_OPS:
            raise ParameterError(f"unknown subset operator {self.op!r}")
        j = frame.covariate_names.index(self.column)
        return SUBSET_OPS[self.op](frame.covariates[:, j], self.value)


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs: data schema, causal method, learners, folds, knobs."""

    input_path: str
    treatment_col: str
    outcome_col: str
    covariate_cols: object = "rest"
    id_col: str | None = None
    outcome_kind: str | None = None
    method: str = "ipw"
    propensity_learner: LearnerSpec = LearnerSpec(kind="logistic", l2=1.0)
    outcome_learner: LearnerSpec | None = None
    k: int = 5
    seed: int = 0
    stratified: bool = True
    stabilized: bool = False
    truncation: tuple[float, float] | None = None
    caliper: float | None = None
    counterfactual_inverse: bool = True
    evaluation: EvalOptions = EvalOptions()
    subsets: dict[str, SubsetRule] = field(default_factory=dict)
    output_dir: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}")
        if self.method == "doubly_robust" and self.outcome_learner is None:
            raise ParameterError("doubly_robust requires an outcome_learner spec")
        if self.k < 2:
            raise ParameterError("folds.k must be at least 2")

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        raw = dict(raw)
        inp = raw.pop("input", None)
        if not isinstance(inp, dict) or "path" not in inp:
            raise SchemaError("config requires input.path")
        _reject_unknown("input", inp, {
            "path", "treatment_col", "outcome_col", "covariate_cols", "id_col",
            "outcome_kind",
        })
        folds = raw.pop("folds", {})
        _reject_unknown("folds", folds, {"k", "seed", "stratified"})
        weights = raw.pop("weights", {})
        _reject_unknown("weights", weights, {"stabilized", "truncation", "caliper"})
        truncation = weights.get("truncation")
        subsets = {
            name: SubsetRule(**rule) for name, rule in raw.pop("subsets", {}).items()
        }
        outcome_learner = raw.pop("outcome_learner", None)
        known = {
            "method",
            "counterfactual_inverse",
            "output_dir",
            "propensity_learner",
            "evaluation",
        }
        unknown = set(raw) - known
        if unknown:
            raise SchemaError(f"unknown config keys: {sorted(unknown)}")
        return cls(
            input_path=inp["path"],
            treatment_col=inp.get("treatment_col", "treatment"),
            outcome_col=inp.get("outcome_col", "outcome"),
            covariate_cols=inp.get("covariate_cols", "rest"),
            id_col=inp.get("id_col"),
            outcome_kind=inp.get("outcome_kind"),
            method=raw.get("method", "ipw"),
            propensity_learner=LearnerSpec.from_dict(raw.get("propensity_learner", {})),
            outcome_learner=(
                LearnerSpec.from_dict(outcome_learner) if outcome_learner else None
            ),
            k=folds.get("k", 5),
            seed=folds.get("seed", 0),
            stratified=folds.get("stratified", True),
            stabilized=weights.get("stabilized", False),
            truncation=tuple(truncation) if truncation else None,
            caliper=weights.get("caliper"),
            counterfactual_inverse=raw.get("counterfactual_inverse", True),
            evaluation=EvalOptions.from_dict(raw.get("evaluation", {})),
            subsets=subsets,
            output_dir=raw.get("output_dir"),
        )

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as handle:
            return cls.from_dict(json.load(handle))

    def canonical_dict(self) -> dict:
        """Analysis-relevant content only (output_dir excluded), for hashing."""
        spec_dict = lambda s: None if s is None else {
            f: getattr(s, f) for f in s.__dataclass_fields__
        }
        return {
            "input": {
                "path": self.input_path,
                "treatment_col": self.treatment_col,
                "outcome_col": self.outcome_col,
                "covariate_cols": self.covariate_cols,
                "id_col": self.id_col,
                "outcome_kind": self.outcome_kind,
            },
            "method": self.method,
            "propensity_learner": spec_dict(self.propensity_learner),
            "outcome_learner": spec_dict(self.outcome_learner),
            "folds": {"k": self.k, "seed": self.seed, "stratified": self.stratified},
            "weights": {
                "stabilized": self.stabilized,
                "truncation": list(self.truncation) if self.truncation else None,
                "caliper": self.caliper,
            },
            "counterfactual_inverse": self.counterfactual_inverse,
            "evaluation": {
                f: getattr(self.evaluation, f)
                for f in self.evaluation.__dataclass_fields__
            },
            "subsets": {
                name: {"column": r.column, "op": r.op, "value": r.value}
                for name, r in sorted(self.subsets.items())
            },
        }

    def config_hash(self) -> str:
        payload = json.dumps(self.canonical_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def fit_artifacts(config: PipelineConfig, frame: CohortFrame) -> FittedArtifacts:
    """Cross-fit the propensity (and outcome) models and derive fold weights."""
    folds = make_folds(
        frame.n, config.k, config.seed, treatment=frame.treatment,
        stratified=config.stratified,
    )
    pfit = fit_propensity(frame, config.propensity_learner, folds)
    weight_vectors = weight_vectors_for_folds(
        pfit,
        frame,
        config.method,
        stabilized=config.stabilized,
        truncation=config.truncation,
        caliper=config.caliper,
        clip_eps=config.evaluation.clip_eps,
    )
    outcome_fit = None
    if config.method == "doubly_robust":
        outcome_fit = fit_doubly_robust(
            frame,
            pfit,
            config.outcome_learner,
            counterfactual_inverse=config.counterfactual_inverse,
        )
    return FittedArtifacts(
        frame=frame,
        folds=folds,
        method=config.method,
        propensity=pfit,
        weight_vectors=weight_vectors,
        outcome=outcome_fit,
        options=config.evaluation,
        tx_label=config.treatment_col,
        outcome_label=config.outcome_col,
        stabilized=config.stabilized,
        truncation=config.truncation,
        caliper=config.caliper,
    )


def emit_figures(
    figures_dir: Path,
    prop: PropensityDiagnostics,
    outcome: OutcomeDiagnostics | None,
    prefix: str = "",
) -> list[str]:
    """Write one JSON + one SVG per figure in the diagnostic bundle.

    The JSON is the source of truth; each SVG is a deterministic rendering.
    Returns the emitted file names.
    """
    written = []
    written += emit_figure(
        balance_figure(prop.balance), figures_dir, f"{prefix}balance"
    )
    written += emit_figure(
        curve_figure(
            "calibration_panel",
            {"propensity": prop.calibration},
            ["diagonal"],
            "Propensity calibration",
        ),
        figures_dir,
        f"{prefix}propensity_calibration",
    )
    written += emit_figure(
        distribution_figure(prop.distribution), figures_dir, f"{prefix}propensity_distribution"
    )
    written += emit_figure(
        curve_figure(
            "roc_panel",
            {
                "propensity": prop.roc,
                "expected": prop.expected_roc,
                "weighted": prop.weighted_roc,
            },
            ["diagonal"],
            "Propensity ROC panel",
            annotation=(
                "advisory: propensity AUC between 0.7 and 0.8 tends to give the "
                "most reliable downstream estimates; near 0.5 is expected under "
                "randomized-like assignment, and steep or flat segments hint at "
                "positivity problems"
            ),
        ),
        figures_dir,
        f"{prefix}roc_panel",
    )
    if outcome is not None:
        if outcome.roc_by_arm is not None:
            written += emit_figure(
                curve_figure(
                    "outcome_roc",
                    {f"arm {a}": s for a, s in sorted(outcome.roc_by_arm.items())},
                    ["diagonal"],
                    "Outcome ROC by treatment arm",
                ),
                figures_dir,
                f"{prefix}outcome_roc",
            )
        if outcome.calibration is not None:
            written += emit_figure(
                curve_figure(
                    "calibration_panel",
                    {"outcome": outcome.calibration},
                    ["diagonal"],
                    "Outcome calibration",
                ),
                figures_dir,
                f"{prefix}outcome_calibration",
            )
        if outcome.pr is not None:
            written += emit_figure(
                curve_figure(
                    "pr_panel",
                    {"outcome": outcome.pr},
                    [],
                    "Outcome precision-recall",
                ),
                figures_dir,
                f"{prefix}outcome_pr",
            )
        if outcome.accuracy is not None:
            written += emit_figure(
                accuracy_figure(outcome.accuracy, "Predicted vs observed outcome"),
                figures_dir,
                f"{prefix}outcome_accuracy",
            )
        if outcome.residuals is not None:
            written += emit_figure(
                accuracy_figure(outcome.residuals, "Outcome residuals"),
                figures_dir,
                f"{prefix}outcome_residuals",
            )
        written += emit_figure(
            scatter_figure(
                outcome.ignorability,
                f"Counterfactual predictions ({outcome.phase})",
            ),
            figures_dir,
            f"{prefix}counterfactual_{outcome.phase}",
        )
    return written


def _ate_dict(diag: OutcomeDiagnostics) -> dict:
    return {
        "phase": diag.phase,
        "estimate": diag.ate.value,
        "per_fold": diag.ate.per_fold.tolist(),
        "std": diag.ate.std,
        "n_rows": diag.ate.n_rows,
    }


def run_pipeline(
    config: PipelineConfig,
    output_dir=None,
    seed_override: int | None = None,
    subset_only: str | None = None,
) -> Path:
    """Execute the full loop and write every report artifact.

    Order: load, folds, propensity fit, weights/matching, optional
    doubly-robust outcome fit, diagnostics on both phases, subset reruns,
    then CSVs, plot JSON/SVG pairs, weights, and the run manifest. Exit
    status is the caller's concern; diagnostic findings are report content,
    never process failures.
    """
    if seed_override is not None:
        config = _replace_seed(config, seed_override)
    out = Path(
        output_dir
        or config.output_dir
        or os.environ.get("CEK_OUTPUT_DIR")
        or "cek_output"
    )
    figures_dir = out / "figures"
    figures_dir.mkdir(parents=True, exist_ok=True)

    frame = load_cohort(
        config.input_path,
        treatment_col=config.treatment_col,
        outcome_col=config.outcome_col,
        covariate_cols=config.covariate_cols,
        id_col=config.id_col,
        outcome_kind=config.outcome_kind,
    )
    if subset_only is not None and subset_only not in config.subsets:
        raise ParameterError(
            f"--subset {subset_only!r} not defined; config has {sorted(config.subsets)}"
        )

    artifacts = fit_artifacts(config, frame)
    pfit, folds = artifacts.propensity, artifacts.folds

    files: list[str] = []
    prop_diags: dict[str, PropensityDiagnostics] = {}
    outcome_diags: dict[str, OutcomeDiagnostics] = {}
    for phase in ("train", "validation"):
        prop_diags[phase] = evaluate_propensity(
            frame,
            pfit,
            artifacts.weight_vectors,
            phase,
            config.evaluation,
            tx_label=config.treatment_col,
        )
        if artifacts.outcome is not None:
            outcome_diags[phase] = evaluate_outcomes(
                frame,
                artifacts.outcome,
                pfit,
                phase,
                config.evaluation,
                tx_label=config.treatment_col,
                outcome_label=config.outcome_col,
            )

    # CSV reports -----------------------------------------------------------
    prop_records = prop_diags["train"].metrics + prop_diags["validation"].metrics
    emit_metrics_csv(prop_records, "propensity", out / "metrics_propensity.csv")
    files.append("metrics_propensity.csv")

    if artifacts.outcome is not None:
        outcome_records = (
            outcome_diags["train"].metrics + outcome_diags["validation"].metrics
        )
        emit_metrics_csv(outcome_records, "outcome", out / "metrics_outcome.csv")
        files.append("metrics_outcome.csv")

    from .evaluation.balance import balance_report

    both_table = balance_report(
        frame,
        [wv.weights for wv in artifacts.weight_vectors],
        folds,
        phase="both",
        threshold=config.evaluation.smd_threshold,
    )
    emit_smd_csv(
        both_table,
        {"tx": config.treatment_col, "outcome": config.outcome_col, "phase": "cv"},
        out / "smd.csv",
    )
    files.append("smd.csv")

    oof_weights = np.empty(frame.n)
    for i in range(frame.n):
        oof_weights[i] = artifacts.weight_vectors[folds.fold_of[i]].weights[i]
    emit_weights_csv(
        frame.sample_ids,
        oof_weights,
        artifacts.weight_vectors[0].kind,
        out / "weights.csv",
    )
    files.append("weights.csv")

    # Figures: validation-phase propensity panel, both-phase counterfactuals.
    files += [
        f"figures/{name}"
        for name in emit_figures(
            figures_dir,
            prop_diags["validation"],
            outcome_diags.get("validation"),
        )
    ]
    if "train" in outcome_diags:
        files += [
            f"figures/{name}"
            for name in emit_figure(
                scatter_figure(
                    outcome_diags["train"].ignorability,
                    "Counterfactual predictions (train)",
                ),
                figures_dir,
                "counterfactual_train",
            )
        ]

    # Effects: train-phase is the headline estimate, validation reported too.
    if outcome_diags:
        effects = {
            "headline": _ate_dict(outcome_diags["train"]),
            "phases": [_ate_dict(d) for d in outcome_diags.values()],
        }
        with open(out / "effects.json", "w", encoding="utf-8") as handle:
            json.dump(effects, handle, indent=2)
            handle.write("\n")
        files.append("effects.json")

    # Subset reruns against the whole-data refits.
    subset_summaries = {}
    wanted = (
        {subset_only: config.subsets[subset_only]} if subset_only else config.subsets
    )
    for name, rule in sorted(wanted.items()):
        sub = evaluate_subset(artifacts, frame, rule.mask(frame), descriptor=name)
        sub_dir = out / "subsets" / name
        sub_figures = sub_dir / "figures"
        sub_figures.mkdir(parents=True, exist_ok=True)
        emit_smd_csv(
            sub.propensity.balance,
            {"tx": config.treatment_col, "outcome": config.outcome_col, "phase": name},
            sub_dir / "smd.csv",
        )
        files.append(f"subsets/{name}/smd.csv")
        files += [
            f"subsets/{name}/figures/{f}"
            for f in emit_figures(sub_figures, sub.propensity, sub.outcome)
        ]
        subset_summaries[name] = {
            "n_selected": sub.n_selected,
            "arm_counts": {str(k): v for k, v in sub.arm_counts.items()},
            "flagged_covariates": list(sub.propensity.balance.flags),
            "ate": _ate_dict(sub.outcome) if sub.outcome else None,
        }
        with open(sub_dir / "summary.json", "w", encoding="utf-8") as handle:
            json.dump(subset_summaries[name], handle, indent=2)
            handle.write("\n")
        files.append(f"subsets/{name}/summary.json")

    manifest = {
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "method": config.method,
        "versions": {
            "cek": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "float_format": "shortest round-trip (repr)",
        "n_samples": frame.n,
        "n_covariates": frame.d,
        "files": sorted(files),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2)
        handle.write("\n")
    return out


def _replace_seed(config: PipelineConfig, seed: int) -> PipelineConfig:
    from dataclasses import replace

    return replace(config, seed=seed)
