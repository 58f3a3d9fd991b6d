"""Static SVG line chart of APL against beta.

Simulated curves are solid, analytic curves dashed, one colour per
scenario.  Output is a pure function of the input rows.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]
WIDTH, HEIGHT = 640, 420
MARGIN = dict(left=64, right=150, top=30, bottom=52)


def _nice_ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(s * mag for s in (1, 2, 2.5, 5, 10) if s * mag >= raw)
    first = math.floor(lo / step)
    last = math.ceil(hi / step - 1e-9)
    return [round(i * step, 10) for i in range(first, last + 1)]


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def render_svg(stats, title: str = "APL vs beta") -> str:
    if not stats:
        raise ValueError("no rows to plot")
    scenarios: list[str] = []
    for s in stats:
        if s.scenario not in scenarios:
            scenarios.append(s.scenario)
    betas = sorted({s.beta for s in stats})
    values = [v for s in stats for v in (s.simulated_mean, s.analytic_value) if math.isfinite(v)]
    yticks = _nice_ticks(0.0, max(values) if values else 1.0)
    ymax = yticks[-1]
    xlo, xhi = betas[0], betas[-1]
    if xhi == xlo:
        xlo, xhi = xlo - 1, xhi + 1
    xticks = betas

    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def X(b):
        return MARGIN["left"] + pw * (b - xlo) / (xhi - xlo)

    def Y(v):
        return MARGIN["top"] + ph * (1 - v / ymax)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{MARGIN["left"] + pw / 2:.2f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    x0, y0 = MARGIN["left"], MARGIN["top"] + ph
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0 + pw}" y2="{y0}" stroke="black"/>')
    out.append(f'<line x1="{x0}" y1="{MARGIN["top"]}" x2="{x0}" y2="{y0}" stroke="black"/>')
    for t in yticks:
        y = Y(t)
        out.append(f'<line x1="{x0 - 4}" y1="{y:.2f}" x2="{x0}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{x0 - 7}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{_fmt(t)}</text>')
    for b in xticks:
        x = X(b)
        out.append(f'<line x1="{x:.2f}" y1="{y0}" x2="{x:.2f}" y2="{y0 + 4}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{y0 + 17}" text-anchor="middle" font-size="11">{b}</text>')
    out.append(f'<text x="{x0 + pw / 2:.2f}" y="{HEIGHT - 12}" text-anchor="middle" font-size="12">beta</text>')
    out.append(
        f'<text x="16" y="{MARGIN["top"] + ph / 2:.2f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {MARGIN["top"] + ph / 2:.2f})">APL</text>'
    )

    for i, name in enumerate(scenarios):
        colour = PALETTE[i % len(PALETTE)]
        rows = sorted((s for s in stats if s.scenario == name), key=lambda s: s.beta)
        for kind, attr, dash in (("simulated", "simulated_mean", ""), ("analytic", "analytic_value", ' stroke-dasharray="6,4"')):
            pts = " ".join(f"{X(s.beta):.2f},{Y(getattr(s, attr)):.2f}" for s in rows if math.isfinite(getattr(s, attr)))
            out.append(
                f'<polyline class="{kind}" data-scenario="{escape(name)}" points="{pts}" fill="none" '
                f'stroke="{colour}" stroke-width="2"{dash}/>'
            )
        ly = MARGIN["top"] + 14 + 18 * i
        lx = WIDTH - MARGIN["right"] + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}" font-size="11">{escape(name)}</text>')
    ly = MARGIN["top"] + 14 + 18 * len(scenarios) + 8
    lx = WIDTH - MARGIN["right"] + 12
    out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="gray" stroke-width="2"/>')
    out.append(f'<text x="{lx + 30}" y="{ly + 4}" font-size="11">simulated</text>')
    ly += 18
    out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="gray" stroke-width="2" stroke-dasharray="6,4"/>')
    out.append(f'<text x="{lx + 30}" y="{ly + 4}" font-size="11">analytic</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
