"""Minimal static SVG log-log plots of convergence tables."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 560, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 60


def _decades(lo: float, hi: float) -> list[float]:
    return [10.0**e for e in range(math.floor(math.log10(lo)), math.ceil(math.log10(hi)) + 1)]


def loglog_svg(
    x,
    y,
    *,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "error",
    fit: tuple[float, float] | None = None,
    guide_slope: float | None = None,
) -> str:
    """SVG text: markers at (x, y), optional fitted line log y = a log x + b and a slope guide.

    ``fit`` is (a, b) in natural logs of the plotted x values.
    """
    pts = [(float(a), float(b)) for a, b in zip(x, y) if a > 0 and b > 0 and math.isfinite(b)]
    if not pts:
        raise ValueError("nothing positive to plot")
    lx = [math.log10(p[0]) for p in pts]
    ly = [math.log10(p[1]) for p in pts]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    padx = max(0.05 * (x1 - x0), 0.05)
    pady = max(0.1 * (y1 - y0), 0.1)
    x0, x1, y0, y1 = x0 - padx, x1 + padx, y0 - pady, y1 + pady

    def sx(v):
        return LEFT + (v - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT)

    def sy(v):
        return HEIGHT - BOTTOM - (v - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{WIDTH - LEFT - RIGHT}" height="{HEIGHT - TOP - BOTTOM}" '
        'fill="none" stroke="black"/>',
    ]
    for d in _decades(10**x0, 10**x1):
        v = math.log10(d)
        if x0 <= v <= x1:
            out.append(f'<line x1="{sx(v):.2f}" y1="{HEIGHT - BOTTOM}" x2="{sx(v):.2f}" y2="{HEIGHT - BOTTOM + 5}" stroke="black"/>')
            out.append(f'<text x="{sx(v):.2f}" y="{HEIGHT - BOTTOM + 18}" text-anchor="middle">{d:g}</text>')
    for d in _decades(10**y0, 10**y1):
        v = math.log10(d)
        if y0 <= v <= y1:
            out.append(f'<line x1="{LEFT - 5}" y1="{sy(v):.2f}" x2="{LEFT}" y2="{sy(v):.2f}" stroke="black"/>')
            out.append(f'<text x="{LEFT - 8}" y="{sy(v) + 4:.2f}" text-anchor="end">{d:g}</text>')
    # tick labels at the data abscissae keep short axes readable
    for a, v in zip(pts, lx):
        out.append(f'<text x="{sx(v):.2f}" y="{HEIGHT - BOTTOM + 34}" text-anchor="middle" fill="#555">{a[0]:g}</text>')

    if fit is not None:
        a, b = fit
        ends = [min(lx), max(lx)]
        ys = [(a * v * math.log(10) + b) / math.log(10) for v in ends]
        out.append(
            f'<line x1="{sx(ends[0]):.2f}" y1="{sy(ys[0]):.2f}" x2="{sx(ends[1]):.2f}" y2="{sy(ys[1]):.2f}" '
            'stroke="#1f77b4" stroke-width="1.5"/>'
        )
    if guide_slope is not None:
        # anchored at the first data point, shifted down by a quarter decade
        ax, ay = lx[0], ly[0] - 0.25
        bx = max(lx)
        by = ay + guide_slope * (bx - ax)
        out.append(
            f'<line x1="{sx(ax):.2f}" y1="{sy(ay):.2f}" x2="{sx(bx):.2f}" y2="{sy(by):.2f}" '
            'stroke="#888" stroke-dasharray="6,4"/>'
        )
    for v, w in zip(lx, ly):
        out.append(f'<circle cx="{sx(v):.2f}" cy="{sy(w):.2f}" r="4" fill="#d62728"/>')

    legend = []
    if fit is not None:
        legend.append(("#1f77b4", "", f"fit, slope {fit[0]:.3f}"))
    if guide_slope is not None:
        legend.append(("#888", ' stroke-dasharray="6,4"', f"reference slope {guide_slope:g}"))
    for i, (color, dash, label) in enumerate(legend):
        yy = TOP + 16 + 16 * i
        out.append(f'<line x1="{WIDTH - RIGHT - 170}" y1="{yy}" x2="{WIDTH - RIGHT - 140}" y2="{yy}" stroke="{color}"{dash}/>')
        out.append(f'<text x="{WIDTH - RIGHT - 134}" y="{yy + 4}">{escape(label)}</text>')

    out.append(f'<text x="{WIDTH / 2:.1f}" y="{TOP - 14}" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append(f'<text x="{(LEFT + WIDTH - RIGHT) / 2:.1f}" y="{HEIGHT - 8}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(
        f'<text x="18" y="{(TOP + HEIGHT - BOTTOM) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(TOP + HEIGHT - BOTTOM) / 2:.1f})">{escape(ylabel)}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
