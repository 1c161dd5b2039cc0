"""Static SVG charts for experiment outputs.

Hand-rolled SVG so figure bytes are a pure function of the input rows: one
polyline per series plus a +/-2 sigma band where replicates exist.  Input
rows are the string dicts produced by ``csv.DictReader``.
"""

from __future__ import annotations

import math

import numpy as np

WIDTH, HEIGHT = 640, 420
ML, MR, MT, MB = 62, 150, 28, 46

PALETTE = {"dc": "#1f77b4", "glasso": "#d62728", "scad": "#2ca02c",
           "adapt": "#9467bd"}
FALLBACK = ("#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f")

PLOT_KINDS = ("f1", "edges", "cvcurve", "time")

_REQUIRED = {
    "f1": ("method", "mode", "n", "edges", "f1"),
    "edges": ("method", "mode", "n", "edges"),
    "cvcurve": ("method", "param", "edges_mean", "holdout_ll_mean"),
    "time": ("method", "p", "n", "seconds_mean"),
}


def _check_schema(kind: str, rows: list[dict]) -> None:
    if kind not in PLOT_KINDS:
        raise ValueError(f"plot kind must be one of {PLOT_KINDS}, got {kind!r}")
    if not rows:
        raise ValueError("no data rows to plot")
    missing = [c for c in _REQUIRED[kind] if c not in rows[0]]
    if missing:
        raise ValueError(f"input is missing columns {missing} for kind={kind}")


def _finite_rows(rows, columns):
    out = []
    for row in rows:
        try:
            vals = [float(row[c]) for c in columns]
        except (TypeError, ValueError):
            continue
        if all(math.isfinite(v) for v in vals):
            out.append(row)
    return out


def _aggregate(rows, x_col, y_col):
    """Per (method, x): mean and population sigma of y across rows."""
    groups: dict = {}
    for row in rows:
        key = (row["method"], float(row[x_col]))
        groups.setdefault(key, []).append(float(row[y_col]))
    series: dict = {}
    for (method, x), ys in sorted(groups.items()):
        series.setdefault(method, []).append(
            (x, float(np.mean(ys)), float(np.std(ys))))
    return series


def _series_for(kind: str, rows: list[dict]):
    """Returns (series, x_label, y_label); series maps label -> [(x, y, sd)]."""
    if kind in ("f1", "edges"):
        y_col = "f1" if kind == "f1" else "edges"
        rows = _finite_rows(rows, ("n", "edges", y_col))
        if not rows:
            raise ValueError("no plottable rows after dropping failed cells")
        fixed = all(r["mode"] == "fixed" for r in rows)
        x_col = "edges" if fixed else "n"
        x_label = "estimated edges" if fixed else "sample size n"
        if kind == "edges" and fixed:
            x_col, x_label = "n", "sample size n"
        return _aggregate(rows, x_col, y_col), x_label, \
            ("F1 score" if kind == "f1" else "selected edges")
    if kind == "cvcurve":
        rows = _finite_rows(rows, ("param", "edges_mean", "holdout_ll_mean"))
        if not rows:
            raise ValueError("no plottable rows after dropping failed cells")
        series: dict = {}
        for row in sorted(rows, key=lambda r: (r["method"], float(r["param"]))):
            series.setdefault(row["method"], []).append(
                (float(row["edges_mean"]), float(row["holdout_ll_mean"]), 0.0))
        return series, "mean selected edges", "mean held-out neg. log-likelihood"
    rows = _finite_rows(rows, ("p", "n", "seconds_mean"))
    if not rows:
        raise ValueError("no plottable rows after dropping failed cells")
    multi_n = len({row["n"] for row in rows}) > 1
    series = {}
    for row in sorted(rows, key=lambda r: (r["method"], int(r["n"]), float(r["p"]))):
        label = f"{row['method']} (n={row['n']})" if multi_n else row["method"]
        series.setdefault(label, []).append(
            (float(row["p"]), float(row["seconds_mean"]), 0.0))
    return series, "variables p", "mean fit seconds"


def _ranges(series):
    xs, ys = [], []
    for pts in series.values():
        for x, y, sd in pts:
            xs.append(x)
            ys.extend((y - 2 * sd, y + 2 * sd))
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    x_pad = 0.05 * (x_hi - x_lo)
    y_pad = 0.05 * (y_hi - y_lo)
    return x_lo - x_pad, x_hi + x_pad, y_lo - y_pad, y_hi + y_pad


def _color(label: str, index: int) -> str:
    base = label.split(" ")[0]
    return PALETTE.get(base, FALLBACK[index % len(FALLBACK)])


def render_plot(kind: str, rows: list[dict], out_path) -> None:
    """Write a deterministic SVG chart for the given rows."""
    _check_schema(kind, rows)
    series, x_label, y_label = _series_for(kind, rows)
    x_lo, x_hi, y_lo, y_hi = _ranges(series)

    def sx(x):
        return ML + (x - x_lo) / (x_hi - x_lo) * (WIDTH - ML - MR)

    def sy(y):
        return HEIGHT - MB - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MT - MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{ML}" y1="{HEIGHT - MB}" x2="{WIDTH - MR}" '
        f'y2="{HEIGHT - MB}" stroke="black"/>',
        f'<line x1="{ML}" y1="{MT}" x2="{ML}" y2="{HEIGHT - MB}" stroke="black"/>',
    ]
    for i in range(5):
        xv = x_lo + i * (x_hi - x_lo) / 4
        yv = y_lo + i * (y_hi - y_lo) / 4
        xp, yp = sx(xv), sy(yv)
        parts.append(f'<line x1="{xp:.2f}" y1="{HEIGHT - MB}" x2="{xp:.2f}" '
                     f'y2="{HEIGHT - MB + 4}" stroke="black"/>')
        parts.append(f'<text x="{xp:.2f}" y="{HEIGHT - MB + 16}" font-size="10" '
                     f'text-anchor="middle">{xv:.4g}</text>')
        parts.append(f'<line x1="{ML - 4}" y1="{yp:.2f}" x2="{ML}" '
                     f'y2="{yp:.2f}" stroke="black"/>')
        parts.append(f'<text x="{ML - 6}" y="{yp + 3:.2f}" font-size="10" '
                     f'text-anchor="end">{yv:.4g}</text>')
    parts.append(f'<text x="{(ML + WIDTH - MR) / 2:.2f}" y="{HEIGHT - 8}" '
                 f'font-size="12" text-anchor="middle">{x_label}</text>')
    parts.append(f'<text x="14" y="{(MT + HEIGHT - MB) / 2:.2f}" font-size="12" '
                 f'text-anchor="middle" transform="rotate(-90 14 '
                 f'{(MT + HEIGHT - MB) / 2:.2f})">{y_label}</text>')

    for idx, (label, pts) in enumerate(sorted(series.items())):
        color = _color(label, idx)
        if any(sd > 0 for _, _, sd in pts) and len(pts) > 1:
            upper = [(sx(x), sy(y + 2 * sd)) for x, y, sd in pts]
            lower = [(sx(x), sy(y - 2 * sd)) for x, y, sd in reversed(pts)]
            ring = " ".join(f"{a:.2f},{b:.2f}" for a, b in upper + lower)
            parts.append(f'<polygon points="{ring}" fill="{color}" '
                         f'fill-opacity="0.15" stroke="none"/>')
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y, _ in pts)
        parts.append(f'<polyline points="{path}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        for x, y, _ in pts:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5" '
                         f'fill="{color}"/>')
        ly = MT + 14 + 16 * idx
        parts.append(f'<line x1="{WIDTH - MR + 10}" y1="{ly}" '
                     f'x2="{WIDTH - MR + 30}" y2="{ly}" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{WIDTH - MR + 35}" y="{ly + 4}" '
                     f'font-size="11">{label}</text>')
    parts.append("</svg>")
    with open(out_path, "w") as fh:
        fh.write("\n".join(parts))
        fh.write("\n")
