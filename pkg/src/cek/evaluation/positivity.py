"""Propensity distribution by arm and positivity-violation flagging."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import ParameterError


@dataclass(frozen=True)
class DistributionSeries:
    """Per-arm binned score distributions on shared bin edges.

    ``suspect_bins`` lists occupied bins where a single arm holds at least
    ``min_count`` samples; ``bin_of_sample`` keeps the per-sample bin index so
    suspects can be traced back to samples.
    """

    mode: str              # "histogram" | "pdf" | "pdf_reflected" | "cdf"
    bin_edges: NDArray     # (bins + 1,)
    counts: NDArray        # (2, bins) raw occupancy per arm
    densities: NDArray     # (2, bins) display values per mode
    suspect_bins: NDArray  # indices of single-arm populated bins
    bin_of_sample: NDArray # (n,)
    treatment: NDArray     # (n,)
    min_count: int

    def to_json_dict(self) -> dict:
        return {
            "kind": "propensity_distribution",
            "mode": self.mode,
            "bin_edges": self.bin_edges.tolist(),
            "counts_control": self.counts[0].tolist(),
            "counts_treated": self.counts[1].tolist(),
            "density_control": self.densities[0].tolist(),
            "density_treated": self.densities[1].tolist(),
            "suspect_bins": self.suspect_bins.tolist(),
            "min_count": self.min_count,
        }


@dataclass(frozen=True)
class PositivityReport:
    """Sample-level suspects: who sits in a single-arm populated score region."""

    mask: NDArray            # (n,) True = suspect
    fraction_by_arm: dict[int, float]
    suspect_bins: NDArray
    min_count: int


def propensity_distribution(
    scores: NDArray,
    treatment: NDArray,
    mode: str = "histogram",
    bin_count: int = 20,
    min_count: int = 10,
) -> DistributionSeries:
    """Histogram both arms' scores on shared equal-width bin edges.

    ``pdf`` normalizes to per-arm densities; ``pdf_reflected`` additionally
    negates the treated densities for the mirrored display; ``cdf`` gives the
    per-arm cumulative fraction. Occupied single-arm bins holding at least
    ``min_count`` samples are reported as positivity suspects.
    """
    scores = np.asarray(getattr(scores, "scores", scores), dtype=float)
    treatment = np.asarray(treatment)
    if len(scores) != len(treatment):
        raise ParameterError("scores and treatment must share a length")
    if mode not in ("histogram", "pdf", "pdf_reflected", "cdf"):
        raise ParameterError(f"unknown distribution mode {mode!r}")
    if bin_count < 1:
        raise ParameterError("bin_count must be >= 1")

    edges = np.histogram_bin_edges(scores, bins=bin_count)
    bins = len(edges) - 1
    bin_of = np.clip(np.searchsorted(edges, scores, side="right") - 1, 0, bins - 1)

    counts = np.zeros((2, bins))
    for arm in (0, 1):
        counts[arm] = np.bincount(bin_of[treatment == arm], minlength=bins)

    widths = np.diff(edges)
    densities = np.zeros_like(counts)
    for arm in (0, 1):
        total = counts[arm].sum()
        if mode == "histogram":
            densities[arm] = counts[arm]
        elif mode in ("pdf", "pdf_reflected"):
            densities[arm] = counts[arm] / (total * widths) if total > 0 else 0.0
        else:
            densities[arm] = np.cumsum(counts[arm]) / total if total > 0 else 0.0
    if mode == "pdf_reflected":
        densities[1] = -densities[1]

    occupied = counts.sum(axis=0) > 0
    single_arm = occupied & ((counts[0] == 0) | (counts[1] == 0))
    enough = counts.max(axis=0) >= min_count
    suspect = np.flatnonzero(single_arm & enough)

    return DistributionSeries(
        mode=mode,
        bin_edges=edges,
        counts=counts,
        densities=densities,
        suspect_bins=suspect,
        bin_of_sample=bin_of,
        treatment=treatment,
        min_count=min_count,
    )


def positivity_flag(series: DistributionSeries) -> PositivityReport:
    """Mark every sample falling in a single-arm populated bin.

    The summary reports the flagged fraction of each arm; no suspect bins
    means an all-false mask.
    """
    mask = np.isin(series.bin_of_sample, series.suspect_bins)
    fractions = {}
    for arm in (0, 1):
        members = series.treatment == arm
        fractions[arm] = float(mask[members].mean()) if members.any() else 0.0
    return PositivityReport(
        mask=mask,
        fraction_by_arm=fractions,
        suspect_bins=series.suspect_bins,
        min_count=series.min_count,
    )
