"""Plot-data JSON builders and a minimal deterministic SVG renderer.

The JSON files are the testable source of truth; each SVG is a pure function
of its JSON dict (no timestamps, no ids), so reruns are byte-identical.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .errors import ParameterError
from .evaluation.balance import BalanceTable
from .evaluation.curves import CurveSeries
from .evaluation.positivity import DistributionSeries
from .evaluation.scatter import AccuracyScatter, IgnorabilityReport

WIDTH, HEIGHT = 640, 440
MARGIN = 56
PLOT_W, PLOT_H = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
SERIES_COLORS = ("#1f77b4", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd")


def _json_safe(obj):
    """Recursively replace non-finite floats with strings for strict JSON."""
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if math.isfinite(value):
            return value
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    return obj


def dump_figure_json(figure: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(_json_safe(figure), handle, indent=2, allow_nan=False)
        handle.write("\n")


# ---------------------------------------------------------------------------
# Figure dict builders


def balance_figure(table: BalanceTable) -> dict:
    data = table.to_json_dict()
    data.update(
        {
            "kind": "love_plot",
            "title": "Covariate balance (absolute SMD)",
            "threshold_line": {"value": table.threshold, "style": "dotted"},
        }
    )
    return data


def curve_figure(
    name: str,
    series: dict[str, CurveSeries],
    references: list[str],
    title: str,
    annotation: str | None = None,
) -> dict:
    figure = {
        "kind": name,
        "title": title,
        "series": {label: s.to_json_dict() for label, s in series.items()},
        "references": references,
    }
    if annotation:
        figure["annotation"] = annotation
    return figure


def distribution_figure(series: DistributionSeries) -> dict:
    data = series.to_json_dict()
    data["title"] = "Propensity distribution by treatment arm"
    return data


def scatter_figure(report: IgnorabilityReport, title: str) -> dict:
    data = report.to_json_dict()
    data["title"] = title
    return data


def accuracy_figure(scatter: AccuracyScatter, title: str) -> dict:
    data = scatter.to_json_dict()
    data["title"] = title
    return data


# ---------------------------------------------------------------------------
# SVG rendering


def _fmt(x: float) -> str:
    return f"{x:.2f}"


class _Canvas:
    def __init__(self, x_range, y_range, title=""):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<text x="{WIDTH / 2}" y="24" text-anchor="middle" font-size="14" '
            f'font-family="sans-serif">{title}</text>',
            f'<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT_W}" height="{PLOT_H}" '
            'fill="none" stroke="black" stroke-width="1"/>',
        ]
        for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
            x = self.x0 + frac * (self.x1 - self.x0)
            y = self.y0 + frac * (self.y1 - self.y0)
            self.parts.append(
                f'<text x="{_fmt(self.px(x))}" y="{HEIGHT - MARGIN + 18}" '
                f'text-anchor="middle" font-size="10" font-family="sans-serif">{x:.2g}</text>'
            )
            self.parts.append(
                f'<text x="{MARGIN - 8}" y="{_fmt(self.py(y) + 3)}" '
                f'text-anchor="end" font-size="10" font-family="sans-serif">{y:.2g}</text>'
            )

    def px(self, x: float) -> float:
        return MARGIN + (x - self.x0) / (self.x1 - self.x0) * PLOT_W

    def py(self, y: float) -> float:
        return HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * PLOT_H

    def polyline(self, xs, ys, color, dash=None, width=1.5):
        pts = " ".join(f"{_fmt(self.px(x))},{_fmt(self.py(y))}" for x, y in zip(xs, ys))
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"{dash_attr}/>'
        )

    def circles(self, xs, ys, color, r=2.5, opacity=0.6):
        for x, y in zip(xs, ys):
            self.parts.append(
                f'<circle cx="{_fmt(self.px(x))}" cy="{_fmt(self.py(y))}" r="{r}" '
                f'fill="{color}" fill-opacity="{opacity}"/>'
            )

    def vline(self, x, color, dash="4,3"):
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{_fmt(self.px(x))}" y1="{MARGIN}" x2="{_fmt(self.px(x))}" '
            f'y2="{HEIGHT - MARGIN}" stroke="{color}"{dash_attr}/>'
        )

    def hline(self, y, color, dash="4,3"):
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{MARGIN}" y1="{_fmt(self.py(y))}" x2="{WIDTH - MARGIN}" '
            f'y2="{_fmt(self.py(y))}" stroke="{color}"{dash_attr}/>'
        )

    def rect(self, x, y, w, h, color, opacity=0.7):
        self.parts.append(
            f'<rect x="{_fmt(self.px(x))}" y="{_fmt(self.py(y))}" '
            f'width="{_fmt(abs(self.px(x + w) - self.px(x)))}" '
            f'height="{_fmt(abs(self.py(y) - self.py(y + h)))}" '
            f'fill="{color}" fill-opacity="{opacity}"/>'
        )

    def legend(self, labels_colors):
        y = MARGIN + 14
        for label, color in labels_colors:
            self.parts.append(
                f'<rect x="{MARGIN + 10}" y="{y - 9}" width="12" height="4" fill="{color}"/>'
            )
            self.parts.append(
                f'<text x="{MARGIN + 28}" y="{y - 3}" font-size="11" '
                f'font-family="sans-serif">{label}</text>'
            )
            y += 16

    def finish(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _finite(values) -> list[float]:
    return [float(v) for v in values if isinstance(v, (int, float)) and math.isfinite(v)]


def _render_love_plot(figure: dict) -> str:
    rows = figure["covariates"]
    finite_vals = _finite(
        [v for r in rows for v in (r["smd_unweighted"], r["smd_weighted"])]
    )
    x_max = max(finite_vals + [figure["threshold_line"]["value"]]) * 1.1 or 1.0
    canvas = _Canvas((0.0, x_max), (0.0, max(len(rows), 1)), figure.get("title", ""))
    for i, row in enumerate(reversed(rows)):
        y = i + 0.5
        for key, color in (("smd_unweighted", "#ff7f0e"), ("smd_weighted", "#1f77b4")):
            value = row[key]
            if not isinstance(value, (int, float)):
                value = x_max  # non-finite sentinel pinned to the right edge
            canvas.circles([min(value, x_max)], [y], color, r=3.5, opacity=0.9)
    canvas.vline(figure["threshold_line"]["value"], "black")
    canvas.legend([("unweighted", "#ff7f0e"), ("weighted", "#1f77b4")])
    return canvas.finish()


def _render_curves(figure: dict) -> str:
    canvas = _Canvas((0.0, 1.0), (0.0, 1.05), figure.get("title", ""))
    if "diagonal" in figure.get("references", []):
        canvas.polyline([0, 1], [0, 1], "#888888", dash="5,4", width=1.0)
    legend = []
    for idx, (label, series) in enumerate(figure["series"].items()):
        color = SERIES_COLORS[idx % len(SERIES_COLORS)]
        triples = [
            (x, y, s)
            for x, y, s in zip(series["grid_x"], series["mean_y"], series["std_y"])
            if isinstance(y, (int, float)) and math.isfinite(y)
        ]
        if not triples:
            continue
        xs_f = [t[0] for t in triples]
        ys_f = [t[1] for t in triples]
        upper = [min(y + s, 2.0) for _, y, s in triples]
        lower = [max(y - s, -1.0) for _, y, s in triples]
        canvas.polyline(xs_f, upper, color, dash="2,3", width=0.7)
        canvas.polyline(xs_f, lower, color, dash="2,3", width=0.7)
        canvas.polyline(xs_f, ys_f, color)
        mean = series.get("summary_mean")
        std = series.get("summary_std")
        if isinstance(mean, (int, float)):
            label = f"{label} ({mean:.3f} ± {std:.3f})" if isinstance(std, (int, float)) else f"{label} ({mean:.3f})"
        legend.append((label, color))
    canvas.legend(legend)
    return canvas.finish()


def _render_calibration(figure: dict) -> str:
    canvas = _Canvas((0.0, 1.0), (0.0, 1.05), figure.get("title", ""))
    canvas.polyline([0, 1], [0, 1], "#888888", dash="5,4", width=1.0)
    legend = []
    for idx, (label, series) in enumerate(figure["series"].items()):
        color = SERIES_COLORS[idx % len(SERIES_COLORS)]
        for f_idx, fold in enumerate(series.get("folds", [])):
            xs, ys = fold["x"], fold["y"]
            if not xs:
                continue
            canvas.polyline(xs, ys, color, width=1.0)
            lo, hi = fold.get("ci_low"), fold.get("ci_high")
            if lo and hi:
                canvas.polyline(xs, lo, color, dash="2,3", width=0.6)
                canvas.polyline(xs, hi, color, dash="2,3", width=0.6)
        legend.append((label, color))
    canvas.legend(legend)
    return canvas.finish()


def _render_distribution(figure: dict) -> str:
    edges = figure["bin_edges"]
    control, treated = figure["density_control"], figure["density_treated"]
    all_vals = _finite(control) + _finite(treated) + [0.0]
    canvas = _Canvas(
        (edges[0], edges[-1]), (min(all_vals), max(all_vals) or 1.0),
        figure.get("title", ""),
    )
    for i in range(len(edges) - 1):
        width = edges[i + 1] - edges[i]
        if control[i]:
            canvas.rect(edges[i], 0, width, control[i], "#1f77b4", opacity=0.55)
        if treated[i]:
            base = min(treated[i], 0.0)
            canvas.rect(edges[i], base, width, abs(treated[i]), "#ff7f0e", opacity=0.55)
    canvas.hline(0.0, "black", dash=None)
    for b in figure.get("suspect_bins", []):
        canvas.vline((edges[b] + edges[b + 1]) / 2, "#d62728")
    canvas.legend([("control", "#1f77b4"), ("treated", "#ff7f0e")])
    return canvas.finish()


def _render_scatter(figure: dict) -> str:
    xs, ys, arms = figure["x"], figure["y"], figure.get("arm", [0] * len(figure["x"]))
    fx, fy = _finite(xs), _finite(ys)
    lo = min(fx + fy + [0.0])
    hi = max(fx + fy + [1.0])
    canvas = _Canvas((lo, hi), (lo, hi), figure.get("title", ""))
    if figure.get("reference") == "diagonal":
        canvas.polyline([lo, hi], [lo, hi], "#888888", dash="5,4", width=1.0)
    elif figure.get("reference") == "residual-zero":
        canvas.hline(0.0, "#888888")
    for arm, color in ((0, "#1f77b4"), (1, "#ff7f0e")):
        sel_x = [x for x, a in zip(xs, arms) if a == arm]
        sel_y = [y for y, a in zip(ys, arms) if a == arm]
        canvas.circles(sel_x, sel_y, color, r=2.0, opacity=0.45)
    canvas.legend([("control", "#1f77b4"), ("treated", "#ff7f0e")])
    return canvas.finish()


def render_svg(figure: dict) -> str:
    """Deterministic SVG for a figure dict produced by the builders above."""
    kind = figure.get("kind")
    if kind == "love_plot":
        return _render_love_plot(figure)
    if kind in ("roc_panel", "pr_panel", "outcome_roc"):
        return _render_curves(figure)
    if kind == "calibration_panel":
        return _render_calibration(figure)
    if kind == "propensity_distribution":
        return _render_distribution(figure)
    if kind in ("counterfactual_scatter", "accuracy_scatter"):
        return _render_scatter(figure)
    raise ParameterError(f"no renderer for figure kind {kind!r}")


def emit_figure(figure: dict, directory, name: str) -> list[str]:
    """Write <name>.json and <name>.svg; returns the file names written."""
    json_path = directory / f"{name}.json"
    svg_path = directory / f"{name}.svg"
    dump_figure_json(figure, json_path)
    with open(svg_path, "w", encoding="utf-8") as handle:
        handle.write(render_svg(figure))
    return [json_path.name, svg_path.name]
