"""Minimal deterministic SVG line/marker charts."""

from dataclasses import dataclass
from html import escape
import math
from pathlib import Path

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


@dataclass
class Series:
    x: np.ndarray
    y: np.ndarray
    label: str = ""
    style: str = "line"  # "line", "dashed" or "markers"
    color: str = None


def nice_ticks(lo, hi, target=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    t = start
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def _n(v):
    return f"{v:.2f}"


def render_svg(series, title="", xlabel="", ylabel="", width=640, height=420):
    """Return the SVG document for ``series`` as a string."""
    if not series:
        raise ValueError("nothing to plot")
    xs = np.concatenate([np.asarray(s.x, float) for s in series])
    ys = np.concatenate([np.asarray(s.y, float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    pad = 0.05 * (y1 - y0) if y1 > y0 else 0.5
    y0, y1 = y0 - pad, y1 + pad
    left, right, top, bottom = 70, 20, 40, 55
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x0) / (x1 - x0) * pw

    def py(y):
        return top + (y1 - y) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for t in nice_ticks(x0, x1):
        out.append(f'<line x1="{_n(px(t))}" y1="{top + ph}" x2="{_n(px(t))}" '
                   f'y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{_n(px(t))}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in nice_ticks(y0, y1):
        out.append(f'<line x1="{left - 5}" y1="{_n(py(t))}" x2="{left}" y2="{_n(py(t))}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{_n(py(t) + 4)}" text-anchor="end">{t:g}</text>')
    if title:
        out.append(f'<text x="{width / 2:g}" y="22" text-anchor="middle" font-size="14">'
                   f'{escape(title)}</text>')
    if xlabel:
        out.append(f'<text x="{left + pw / 2:g}" y="{height - 12}" text-anchor="middle">'
                   f'{escape(xlabel)}</text>')
    if ylabel:
        out.append(f'<text x="16" y="{top + ph / 2:g}" text-anchor="middle" '
                   f'transform="rotate(-90 16 {top + ph / 2:g})">{escape(ylabel)}</text>')
    for i, s in enumerate(series):
        color = s.color or PALETTE[i % len(PALETTE)]
        pts = [(px(a), py(b)) for a, b in zip(np.asarray(s.x, float), np.asarray(s.y, float))]
        if s.style == "markers":
            out.append(f'<g fill="{color}">')
            out += [f'<circle cx="{_n(a)}" cy="{_n(b)}" r="2.5"/>' for a, b in pts]
            out.append("</g>")
        else:
            dash = ' stroke-dasharray="6 4"' if s.style == "dashed" else ""
            coords = " ".join(f"{_n(a)},{_n(b)}" for a, b in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
                       f'points="{coords}"/>')
    labelled = [(i, s) for i, s in enumerate(series) if s.label]
    for row, (i, s) in enumerate(labelled):
        color = s.color or PALETTE[i % len(PALETTE)]
        y = top + 14 + 16 * row
        x = left + pw - 150
        out.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 20}" y2="{y - 4}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{x + 26}" y="{y}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_plot(series, path, **style):
    Path(path).write_text(render_svg(series, **style))
    return Path(path)
