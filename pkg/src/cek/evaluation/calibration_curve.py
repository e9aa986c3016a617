"""Reliability diagram points with binomial-inversion confidence intervals."""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import brentq

from ..errors import ParameterError
from .curves import FoldCurve


def binomial_ci_bounds(p: float, n: int) -> tuple[float, float]:
    """The r-values solving r +/- sqrt(r(1-r)/n) = p, clamped to [0, 1].

    The lower bound solves r + sqrt(r(1-r)/n) = p on [0, p]; the upper bound
    solves r - sqrt(r(1-r)/n) = p on [p, 1]. Both equations have a single
    root in their bracket, found numerically.
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError("observed proportion must lie in [0, 1]")
    if n < 1:
        raise ParameterError("bin size must be at least 1")

    def lower_eq(r):
        return r + np.sqrt(r * (1.0 - r) / n) - p

    def upper_eq(r):
        return r - np.sqrt(r * (1.0 - r) / n) - p

    # At p exactly 0 or 1 the defining equations pick up a spurious root at the
    # boundary itself; shrink the bracket to land on the interior root.
    if p == 0.0:
        lo = 0.0
    else:
        lo = float(brentq(lower_eq, 0.0, p if p < 1.0 else 1.0 - 1e-12, xtol=1e-14))
    if p == 1.0:
        hi = 1.0
    else:
        hi = float(brentq(upper_eq, p if p > 0.0 else 1e-12, 1.0, xtol=1e-14))
    return min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0)


def _bin_slices(scores: NDArray, n_bins: int) -> list[NDArray]:
    """Equal-frequency bins by score quantiles; duplicate edges merge bins."""
    edges = np.quantile(scores, np.linspace(0.0, 1.0, n_bins + 1))
    edges = np.unique(edges)
    if len(edges) < 2:  # constant scores: one bin holding everything
        return [np.arange(len(scores))]
    assignments = np.clip(np.searchsorted(edges, scores, side="right") - 1, 0, len(edges) - 2)
    return [np.flatnonzero(assignments == b) for b in range(len(edges) - 1)]


def _window_slices(scores: NDArray, width: int, stride: int) -> list[NDArray]:
    order = np.argsort(scores, kind="stable")
    return [order[start : start + width] for start in range(0, len(order) - width + 1, stride)]


def calibration_curve(
    scores: NDArray,
    labels: NDArray,
    strategy: str = "bins",
    resolution: int = 10,
    window_width: int | None = None,
    window_stride: int | None = None,
) -> FoldCurve:
    """Mean predicted probability vs observed frequency per bin or sliding window.

    Each point carries the bin size and the confidence band from
    :func:`binomial_ci_bounds`. ``strategy="bins"`` uses ``resolution``
    equal-frequency bins; ``strategy="window"`` runs a sliding window of
    ``window_width`` samples (required, no default) with stride
    ``window_stride`` (default: a quarter of the width). Empty bins are
    skipped and counted in the extras.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if len(scores) != len(labels):
        raise ParameterError("scores and labels must share a length")
    if len(scores) == 0:
        raise ParameterError("calibration_curve needs at least one sample")
    if scores.min() < 0.0 or scores.max() > 1.0:
        raise ParameterError("scores must lie in [0, 1]")

    if strategy == "bins":
        if resolution < 1:
            raise ParameterError("resolution must be >= 1")
        groups = _bin_slices(scores, resolution)
    elif strategy == "window":
        if window_width is None:
            raise ParameterError("window strategy requires window_width")
        if window_width < 1 or window_width > len(scores):
            raise ParameterError("window_width must be in [1, n]")
        stride = window_stride if window_stride is not None else max(1, window_width // 4)
        groups = _window_slices(scores, window_width, stride)
    else:
        raise ParameterError(f"unknown calibration strategy {strategy!r}")

    r_mean, p_obs, counts, ci_low, ci_high = [], [], [], [], []
    skipped = 0
    for members in groups:
        if len(members) == 0:
            skipped += 1
            continue
        r = float(scores[members].mean())
        p = float(labels[members].mean())
        lo, hi = binomial_ci_bounds(p, len(members))
        r_mean.append(r)
        p_obs.append(p)
        counts.append(len(members))
        ci_low.append(lo)
        ci_high.append(hi)

    return FoldCurve(
        kind="calibration",
        x=np.array(r_mean),
        y=np.array(p_obs),
        summary=None,
        extras={
            "n": np.array(counts, dtype=np.int64),
            "ci_low": np.array(ci_low),
            "ci_high": np.array(ci_high),
            "skipped_bins": skipped,
        },
    )
