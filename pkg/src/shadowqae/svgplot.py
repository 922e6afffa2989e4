"""Tiny dependency-free SVG charts: axes, points, error bars, lines, bars.

Output is a pure function of the inputs (fixed number formatting, no
timestamps), so plots are as reproducible as the CSV files they accompany.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

WIDTH, HEIGHT = 480, 360
MARGIN = dict(left=64, right=20, top=30, bottom=50)
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    return f"{v:.4g}"


@dataclass
class Chart:
    """Accumulates primitives in data coordinates and renders them to SVG."""

    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    logx: bool = False
    logy: bool = False
    _items: list = field(default_factory=list)

    def points(self, xs, ys, yerr=None, color=COLORS[0]):
        self._items.append(("points", list(xs), list(ys), None if yerr is None else list(yerr), color))

    def line(self, xs, ys, color=COLORS[1], dashed=False):
        self._items.append(("line", list(xs), list(ys), dashed, color))

    def bars(self, edges, heights, color=COLORS[0]):
        self._items.append(("bars", list(edges), list(heights), None, color))

    def _tx(self, v: float, log: bool) -> float:
        return math.log10(v) if log else v

    def _extent(self):
        xs, ys = [], []
        for kind, x, y, extra, _ in self._items:
            xs += x
            if kind == "points" and extra is not None:
                ys += [a - e for a, e in zip(y, extra)] + [a + e for a, e in zip(y, extra)]
            else:
                ys += y
            if kind == "bars":
                ys.append(0.0)
        xs = [self._tx(v, self.logx) for v in xs if not self.logx or v > 0]
        ys = [self._tx(v, self.logy) for v in ys if not self.logy or v > 0]
        if not xs or not ys:
            return 0.0, 1.0, 0.0, 1.0
        x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        px, py = 0.05 * (x1 - x0), 0.05 * (y1 - y0)
        return x0 - px, x1 + px, y0 - py, y1 + py

    def render(self) -> str:
        x0, x1, y0, y1 = self._extent()
        pw = WIDTH - MARGIN["left"] - MARGIN["right"]
        ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

        def sx(v):
            return MARGIN["left"] + (self._tx(v, self.logx) - x0) / (x1 - x0) * pw

        def sy(v):
            return MARGIN["top"] + ph - (self._tx(v, self.logy) - y0) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
            f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
            f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" '
            'fill="none" stroke="black"/>',
        ]
        for i in range(5):
            fx = x0 + (x1 - x0) * i / 4
            fy = y0 + (y1 - y0) * i / 4
            xv = 10 ** fx if self.logx else fx
            yv = 10 ** fy if self.logy else fy
            X, Y = sx(xv), sy(yv)
            base = MARGIN["top"] + ph
            out.append(f'<line x1="{_fmt(X)}" y1="{base}" x2="{_fmt(X)}" y2="{base + 4}" stroke="black"/>')
            out.append(f'<text x="{_fmt(X)}" y="{base + 16}" text-anchor="middle">{_tick_label(xv)}</text>')
            out.append(f'<line x1="{MARGIN["left"] - 4}" y1="{_fmt(Y)}" x2="{MARGIN["left"]}" y2="{_fmt(Y)}" stroke="black"/>')
            out.append(f'<text x="{MARGIN["left"] - 6}" y="{_fmt(Y + 4)}" text-anchor="end">{_tick_label(yv)}</text>')

        for kind, xs, ys, extra, color in self._items:
            if kind == "bars":
                for left, right, h in zip(xs[:-1], xs[1:], ys):
                    top, bottom = sy(max(h, 0.0)), sy(0.0)
                    out.append(
                        f'<rect x="{_fmt(sx(left))}" y="{_fmt(top)}" width="{_fmt(sx(right) - sx(left))}" '
                        f'height="{_fmt(bottom - top)}" fill="{color}" fill-opacity="0.5" stroke="{color}"/>'
                    )
            elif kind == "line":
                pts = " ".join(f"{_fmt(sx(x))},{_fmt(sy(y))}" for x, y in zip(xs, ys))
                dash = ' stroke-dasharray="6,4"' if extra else ""
                out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>')
            else:
                for j, (x, y) in enumerate(zip(xs, ys)):
                    if extra is not None:
                        e = extra[j]
                        out.append(
                            f'<line x1="{_fmt(sx(x))}" y1="{_fmt(sy(y - e))}" x2="{_fmt(sx(x))}" '
                            f'y2="{_fmt(sy(y + e))}" stroke="{color}"/>'
                        )
                    out.append(f'<circle cx="{_fmt(sx(x))}" cy="{_fmt(sy(y))}" r="3" fill="{color}"/>')

        cx = MARGIN["left"] + pw / 2
        out.append(f'<text x="{_fmt(cx)}" y="{HEIGHT - 12}" text-anchor="middle">{_esc(self.xlabel)}</text>')
        cy = MARGIN["top"] + ph / 2
        out.append(
            f'<text x="14" y="{_fmt(cy)}" text-anchor="middle" transform="rotate(-90 14 {_fmt(cy)})">'
            f"{_esc(self.ylabel)}</text>"
        )
        out.append(f'<text x="{_fmt(cx)}" y="18" text-anchor="middle">{_esc(self.title)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def sweep_chart(params: Sequence[float], truth, means, stds, xlabel: str) -> str:
    c = Chart(title="Estimated vs true fidelity", xlabel=xlabel, ylabel="fidelity")
    c.line(params, truth, color=COLORS[3], dashed=True)
    c.points(params, means, stds)
    return c.render()


def scaling_chart(d_values, M_values, alpha: float | None, beta: float | None) -> str:
    c = Chart(title="Selected M vs dimension", xlabel="d", ylabel="M", logx=True, logy=True)
    if d_values:
        c.points(d_values, M_values)
        lo, hi = min(d_values), max(d_values)
        if alpha is not None and beta is not None:
            c.line([lo, hi], [alpha * lo ** beta, alpha * hi ** beta], color=COLORS[1])
            # reference slope-1 line through the first fitted point
            c.line([lo, hi], [alpha * lo ** beta, alpha * lo ** beta * hi / lo], color=COLORS[3], dashed=True)
    return c.render()


def histogram_chart(edges, density, center: float, width: float, truth: float) -> str:
    c = Chart(title="Distribution of estimates", xlabel="estimate", ylabel="density")
    c.bars(edges, density)
    if width > 0:
        xs = [edges[0] + (edges[-1] - edges[0]) * i / 100 for i in range(101)]
        ys = [math.exp(-0.5 * ((x - center) / width) ** 2) / (width * math.sqrt(2 * math.pi)) for x in xs]
        c.line(xs, ys, color=COLORS[1])
    top = max(list(density) + [0.0])
    c.line([truth, truth], [0.0, top], color=COLORS[3], dashed=True)
    return c.render()
