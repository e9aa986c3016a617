"""Synthetic observational cohorts with a full ground-truth oracle."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from .cohort import CohortFrame
from .errors import EmptySubsetError, ParameterError


@dataclass(frozen=True)
class PositivityRule:
    """Deterministic assignment: samples with covariate[column] > threshold get forced_arm."""

    column: int
    threshold: float
    forced_arm: int = 1


@dataclass(frozen=True)
class SynthConfig:
    """Generative recipe: independent covariates, logistic treatment, logistic/linear outcome.

    Confounding enters through covariates shared by ``propensity_coef`` and
    ``outcome_coef``. ``overlap_strength`` scales the propensity logits
    (toward 0 means every true propensity approaches 0.5). The optional
    ``positivity_rule`` deterministically forces one arm on part of the
    space, mirroring how real cohorts violate positivity.
    """

    n: int
    d: int
    propensity_coef: tuple[float, ...]
    outcome_coef: tuple[float, ...]
    treatment_effect: float
    propensity_intercept: float = 0.0
    outcome_intercept: float = 0.0
    outcome_kind: str = "binary"
    noise_sd: float = 1.0
    n_binary_covariates: int = 0
    binary_rate: float | tuple[float, ...] = 0.5
    positivity_rule: PositivityRule | None = None
    overlap_strength: float = 1.0
    seed: int = 0
    covariate_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ParameterError("n and d must be positive")
        if len(self.propensity_coef) != self.d or len(self.outcome_coef) != self.d:
            raise ParameterError("coefficient vectors must have length d")
        if self.outcome_kind not in ("binary", "continuous"):
            raise ParameterError(f"unknown outcome_kind {self.outcome_kind!r}")
        if not 0 <= self.n_binary_covariates <= self.d:
            raise ParameterError("n_binary_covariates must lie in [0, d]")
        rates = self.binary_rates()
        if self.n_binary_covariates and len(rates) != self.n_binary_covariates:
            raise ParameterError("binary_rate tuple must match n_binary_covariates")
        if any(not 0.0 < r < 1.0 for r in rates):
            raise ParameterError("binary rates must lie in (0, 1)")
        if self.positivity_rule is not None and not (
            0 <= self.positivity_rule.column < self.d
        ):
            raise ParameterError("positivity_rule column out of range")
        if self.covariate_names and len(self.covariate_names) != self.d:
            raise ParameterError("covariate_names must have length d")

    def names(self) -> tuple[str, ...]:
        return self.covariate_names or tuple(f"x{j}" for j in range(self.d))

    def binary_rates(self) -> tuple[float, ...]:
        if isinstance(self.binary_rate, (int, float)):
            return (float(self.binary_rate),) * self.n_binary_covariates
        return tuple(float(r) for r in self.binary_rate)


@dataclass(frozen=True)
class SynthOracle:
    """Ground truth per sample: propensity, both potential outcomes, and their ATE."""

    true_propensity: NDArray
    y0: NDArray
    y1: NDArray
    ate: float


def generate(config: SynthConfig) -> tuple[CohortFrame, SynthOracle]:
    """Draw a cohort and its oracle; bit-identical regeneration per seed.

    Draw order is fixed (covariates, treatment, outcome), so changing only
    outcome parameters reuses the same covariates and assignments.
    """
    rng = np.random.default_rng(config.seed)
    n, d = config.n, config.d

    n_normal = d - config.n_binary_covariates
    X = np.empty((n, d))
    X[:, :n_normal] = rng.standard_normal((n, n_normal))
    if config.n_binary_covariates:
        rates = np.array(config.binary_rates())
        X[:, n_normal:] = (rng.random((n, config.n_binary_covariates)) < rates).astype(float)

    beta_p = np.asarray(config.propensity_coef, dtype=float)
    logits = config.propensity_intercept + config.overlap_strength * (X @ beta_p)
    propensity = expit(logits)
    if config.positivity_rule is not None:
        rule = config.positivity_rule
        forced = X[:, rule.column] > rule.threshold
        propensity = np.where(forced, float(rule.forced_arm), propensity)
    treatment = (rng.random(n) < propensity).astype(np.int64)

    beta_y = np.asarray(config.outcome_coef, dtype=float)
    base = config.outcome_intercept + X @ beta_y
    if config.outcome_kind == "binary":
        y0 = expit(base)
        y1 = expit(base + config.treatment_effect)
        observed_mean = np.where(treatment == 1, y1, y0)
        outcome = (rng.random(n) < observed_mean).astype(float)
    else:
        y0 = base.copy()
        y1 = base + config.treatment_effect
        observed_mean = np.where(treatment == 1, y1, y0)
        outcome = observed_mean + config.noise_sd * rng.standard_normal(n)

    frame = CohortFrame(
        sample_ids=np.arange(n),
        covariates=X,
        covariate_names=config.names(),
        treatment=treatment,
        outcome=outcome,
        outcome_kind=config.outcome_kind,
        treatment_levels=(0, 1),
    )
    oracle = SynthOracle(
        true_propensity=propensity,
        y0=y0,
        y1=y1,
        ate=float((y1 - y0).mean()),
    )
    return frame, oracle


def oracle_ate(oracle: SynthOracle, mask: NDArray | None = None) -> float:
    """Mean true potential-outcome difference over the (masked) samples."""
    diff = oracle.y1 - oracle.y0
    if mask is None:
        return float(diff.mean())
    mask = np.asarray(mask, dtype=bool)
    if len(mask) != len(diff):
        raise ParameterError("mask length does not match cohort size")
    if not mask.any():
        raise EmptySubsetError("oracle ATE mask selects no samples")
    return float(diff[mask].mean())


def write_cohort_csv(frame: CohortFrame, path) -> None:
    """Cohort CSV in the ingestion schema: id, covariates, treatment, outcome."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["sample_id", *frame.covariate_names, "treatment", "outcome"])
        for i in range(frame.n):
            writer.writerow(
                [
                    frame.sample_ids[i],
                    *[repr(float(v)) for v in frame.covariates[i]],
                    int(frame.treatment[i]),
                    repr(float(frame.outcome[i])),
                ]
            )


def write_oracle_csv(oracle: SynthOracle, sample_ids: NDArray, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["sample_id", "true_propensity", "y0", "y1"])
        for i in range(len(sample_ids)):
            writer.writerow(
                [
                    sample_ids[i],
                    repr(float(oracle.true_propensity[i])),
                    repr(float(oracle.y0[i])),
                    repr(float(oracle.y1[i])),
                ]
            )
