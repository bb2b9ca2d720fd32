"""Self-contained SVG of P_CE against Eb/N0 on a log axis."""

from __future__ import annotations

import math
from html import escape
from typing import Sequence

from .simulator import SimResult

W, H = 640, 420
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 30, 50


def sweep_svg(results: Sequence[SimResult], title: str = "") -> str:
    xs = [r.ebno_db for r in results]
    ys = [r.p_ce for r in results if r.p_ce > 0]
    ys += [r.asymptote for r in results if r.asymptote > 0 and math.isfinite(r.asymptote)]
    ys += [max(r.p_ce - r.ci95, 0.0) for r in results if r.p_ce - r.ci95 > 0]
    ys += [r.p_ce + r.ci95 for r in results if r.p_ce > 0]
    lo = math.floor(math.log10(min(ys))) if ys else -6
    hi = math.ceil(math.log10(max(ys))) if ys else 0
    if hi <= lo:
        hi = lo + 1
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5

    def px(x):
        return LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT)

    def py(y):
        return TOP + (hi - math.log10(y)) / (hi - lo) * (H - TOP - BOTTOM)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect width="{W}" height="{H}" fill="white"/>',
    ]
    for d in range(lo, hi + 1):
        y = py(10.0**d)
        out.append(f'<line x1="{LEFT}" y1="{y:.1f}" x2="{W - RIGHT}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{LEFT - 6}" y="{y + 4:.1f}" text-anchor="end">1e{d}</text>')
    for x in xs:
        out.append(f'<text x="{px(x):.1f}" y="{H - BOTTOM + 18}" text-anchor="middle">{x:g}</text>')
    out.append(
        f'<rect x="{LEFT}" y="{TOP}" width="{W - LEFT - RIGHT}" height="{H - TOP - BOTTOM}" '
        'fill="none" stroke="black"/>'
    )
    out.append(f'<text x="{(LEFT + W - RIGHT) / 2}" y="{H - 10}" text-anchor="middle">Eb/N0 (dB)</text>')
    out.append(f'<text x="16" y="{(TOP + H - BOTTOM) / 2}" transform="rotate(-90 16 {(TOP + H - BOTTOM) / 2})" '
               'text-anchor="middle">P_CE</text>')
    if title:
        out.append(f'<text x="{LEFT}" y="{TOP - 10}">{escape(title)}</text>')

    asym = [(px(r.ebno_db), py(r.asymptote)) for r in results if r.asymptote > 0 and math.isfinite(r.asymptote)]
    if len(asym) > 1:
        pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in asym)
        out.append(f'<polyline points="{pts}" fill="none" stroke="#c33" stroke-dasharray="6,4"/>')
    for r in results:
        if r.p_ce <= 0:
            continue
        x = px(r.ebno_db)
        if r.p_ce - r.ci95 > 0:
            out.append(f'<line x1="{x:.1f}" y1="{py(r.p_ce + r.ci95):.1f}" x2="{x:.1f}" '
                       f'y2="{py(r.p_ce - r.ci95):.1f}" stroke="#335"/>')
        out.append(f'<circle cx="{x:.1f}" cy="{py(r.p_ce):.1f}" r="4" fill="#33a"/>')
    lx = W - RIGHT - 170
    out.append(f'<circle cx="{lx}" cy="{TOP + 16}" r="4" fill="#33a"/>')
    out.append(f'<text x="{lx + 10}" y="{TOP + 20}">simulated P_CE (95% CI)</text>')
    out.append(f'<line x1="{lx - 8}" y1="{TOP + 34}" x2="{lx + 6}" y2="{TOP + 34}" stroke="#c33" stroke-dasharray="6,4"/>')
    out.append(f'<text x="{lx + 10}" y="{TOP + 38}">Q(min VED / sigma)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
