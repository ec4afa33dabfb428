"""Error versus tuning time scatter plots, written directly as SVG 1.1."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

from .bench import BenchReport

PANEL_W = 360
PANEL_H = 280
MARGIN_L = 70
MARGIN_R = 20
MARGIN_T = 40
MARGIN_B = 50
LEGEND_ROW = 18
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf")
MARKERS = ("circle", "square", "diamond", "triangle")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _log_range(values):
    lo = math.floor(math.log10(min(values)))
    hi = math.ceil(math.log10(max(values)))
    return lo, max(hi, lo + 1)


def _lin_range(values):
    lo, hi = min(values), max(values)
    pad = 0.1 * (hi - lo) if hi > lo else max(0.05 * abs(hi), 0.01)
    return max(0.0, lo - pad), hi + pad


def _marker(shape, x, y, color, attrs):
    r = 5.0
    if shape == "circle":
        return f'<circle {attrs} cx="{_fmt(x)}" cy="{_fmt(y)}" r="{r:g}" fill="{color}"/>'
    if shape == "square":
        return (f'<rect {attrs} x="{_fmt(x - r)}" y="{_fmt(y - r)}" width="{2 * r:g}" '
                f'height="{2 * r:g}" fill="{color}"/>')
    if shape == "diamond":
        pts = [(x, y - r - 1), (x + r + 1, y), (x, y + r + 1), (x - r - 1, y)]
    else:
        pts = [(x, y - r - 1), (x + r + 1, y + r), (x - r - 1, y + r)]
    p = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in pts)
    return f'<polygon {attrs} points="{p}" fill="{color}"/>'


def render_svg(report: BenchReport, title: str = "") -> str:
    """One panel per dataset: x = mean tuning seconds (log10), y = mean error.

    Error is ``1 - accuracy`` for a binary response and RMSE otherwise.  Each
    (dataset, method) cell is one element with ``class="marker"`` carrying
    its values in ``data-*`` attributes.
    """
    aggs = [a for a in report.aggregates() if a["n_trials"] > 0]
    if not aggs:
        raise ValueError("report has no successful trials to plot")
    datasets = list(dict.fromkeys(a["dataset"] for a in aggs))
    methods = list(dict.fromkeys(a["method"] for a in aggs))
    style = {m: (PALETTE[i % len(PALETTE)], MARKERS[(i // len(PALETTE)) % len(MARKERS)])
             for i, m in enumerate(methods)}
    legend_h = LEGEND_ROW * len(methods) + 20
    width = len(datasets) * (PANEL_W + MARGIN_L + MARGIN_R)
    height = MARGIN_T + PANEL_H + MARGIN_B + legend_h
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    for p, ds in enumerate(datasets):
        cells = [a for a in aggs if a["dataset"] == ds]
        x0 = p * (PANEL_W + MARGIN_L + MARGIN_R) + MARGIN_L
        y0 = MARGIN_T
        secs = [max(a["mean_seconds"], 1e-6) for a in cells]
        errs = [a["error"] for a in cells]
        lx, hx = _log_range(secs)
        ly, hy = _lin_range(errs)
        ylabel = "Classification error" if cells[0]["metric"] == "accuracy" else "RMSE"

        def px(s):
            return x0 + (math.log10(s) - lx) / (hx - lx) * PANEL_W

        def py(e):
            return y0 + PANEL_H - (e - ly) / (hy - ly) * PANEL_H

        out.append(f'<g class="panel" data-dataset="{escape(ds)}">')
        out.append(f'<rect x="{x0}" y="{y0}" width="{PANEL_W}" height="{PANEL_H}" fill="none" '
                   f'stroke="black"/>')
        out.append(f'<text x="{x0 + PANEL_W / 2:g}" y="{y0 - 12}" text-anchor="middle" '
                   f'font-size="13">{escape(ds)}</text>')
        for dec in range(lx, hx + 1):
            tx = px(10.0 ** dec)
            out.append(f'<line class="xtick" x1="{_fmt(tx)}" y1="{y0 + PANEL_H}" x2="{_fmt(tx)}" '
                       f'y2="{y0 + PANEL_H + 5}" stroke="black"/>')
            out.append(f'<text x="{_fmt(tx)}" y="{y0 + PANEL_H + 18}" text-anchor="middle">'
                       f'1e{dec}</text>')
        for i in range(5):
            e = ly + (hy - ly) * i / 4
            ty = py(e)
            out.append(f'<line class="ytick" x1="{x0 - 5}" y1="{_fmt(ty)}" x2="{x0}" y2="{_fmt(ty)}" '
                       f'stroke="black"/>')
            out.append(f'<text x="{x0 - 8}" y="{_fmt(ty + 4)}" text-anchor="end">{e:.3g}</text>')
        out.append(f'<text x="{x0 + PANEL_W / 2:g}" y="{y0 + PANEL_H + 36}" text-anchor="middle">'
                   f'Mean tuning time (s, log scale)</text>')
        out.append(f'<text class="ylabel" transform="translate({x0 - 50},{y0 + PANEL_H / 2:g}) '
                   f'rotate(-90)" text-anchor="middle">{ylabel}</text>')
        for a, s, e in zip(cells, secs, errs):
            color, shape = style[a["method"]]
            attrs = (f'class="marker" data-method="{escape(a["method"])}" '
                     f'data-seconds="{a["mean_seconds"]!r}" data-error="{e!r}"')
            out.append(_marker(shape, px(s), py(e), color, attrs))
        out.append('</g>')
    ly0 = MARGIN_T + PANEL_H + MARGIN_B + 10
    out.append('<g class="legend">')
    for i, m in enumerate(methods):
        color, shape = style[m]
        y = ly0 + i * LEGEND_ROW
        out.append(_marker(shape, MARGIN_L + 6, y, color, 'class="legend-key"'))
        out.append(f'<text x="{MARGIN_L + 18}" y="{y + 4}">{escape(m)}</text>')
    out.append('</g>')
    out.append('</svg>')
    return "\n".join(out) + "\n"


def write_svg(report: BenchReport, path, title: str = "") -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_svg(report, title))
