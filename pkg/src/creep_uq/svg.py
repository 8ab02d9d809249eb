"""Tiny static SVG bar charts, no plotting runtime required.

Renders a histogram with optional vertical markers: red for the 95%
interval bounds, gold for observed rupture times. Output is a plain string
with stable number formatting, so identical inputs yield identical bytes.
"""

from __future__ import annotations

import numpy as np

WIDTH = 720
HEIGHT = 420
MARGIN_LEFT = 60
MARGIN_RIGHT = 20
MARGIN_TOP = 40
MARGIN_BOTTOM = 50


def _fmt(value: float) -> str:
    return format(float(value), ".6g")


def histogram_svg(edges, counts, title: str = "", x_label: str = "",
                  interval: tuple[float, float] | None = None,
                  observed=()) -> str:
    """Render a histogram plus vertical markers as an SVG document string."""
    edges = np.asarray(edges, dtype=float)
    counts = np.asarray(counts, dtype=float)
    observed = [float(v) for v in observed]
    x_lo = min([edges[0]] + observed + ([interval[0]] if interval else []))
    x_hi = max([edges[-1]] + observed + ([interval[1]] if interval else []))
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    span = x_hi - x_lo
    x_lo, x_hi = x_lo - 0.02 * span, x_hi + 0.02 * span
    y_hi = max(counts.max(initial=0.0), 1.0)

    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM

    def sx(value):
        return MARGIN_LEFT + (value - x_lo) / (x_hi - x_lo) * plot_w

    def sy(value):
        return MARGIN_TOP + plot_h - value / y_hi * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
    ]
    for i, count in enumerate(counts):
        x0, x1 = sx(edges[i]), sx(edges[i + 1])
        y = sy(count)
        parts.append(
            f'<rect x="{x0:.2f}" y="{y:.2f}" width="{max(x1 - x0, 0.5):.2f}" '
            f'height="{MARGIN_TOP + plot_h - y:.2f}" fill="#4878a8" stroke="white" '
            f'stroke-width="0.5"/>')
    if interval is not None:
        for bound in interval:
            x = sx(bound)
            parts.append(f'<line x1="{x:.2f}" y1="{MARGIN_TOP}" x2="{x:.2f}" '
                         f'y2="{MARGIN_TOP + plot_h}" stroke="red" stroke-width="1.5"/>')
    for value in observed:
        x = sx(value)
        parts.append(f'<line x1="{x:.2f}" y1="{MARGIN_TOP}" x2="{x:.2f}" '
                     f'y2="{MARGIN_TOP + plot_h}" stroke="gold" stroke-width="1.5"/>')
    parts.append(
        f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP + plot_h}" '
        f'x2="{WIDTH - MARGIN_RIGHT}" y2="{MARGIN_TOP + plot_h}" stroke="black"/>')
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        value = x_lo + frac * (x_hi - x_lo)
        x = sx(value)
        parts.append(f'<text x="{x:.2f}" y="{MARGIN_TOP + plot_h + 18}" '
                     f'text-anchor="middle" font-family="sans-serif" font-size="11">'
                     f'{_fmt(value)}</text>')
    parts.append(f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="12">{x_label}</text>')
    parts.append(f'<text x="12" y="{MARGIN_TOP - 8}" font-family="sans-serif" '
                 f'font-size="11">count (max {_fmt(y_hi)})</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
