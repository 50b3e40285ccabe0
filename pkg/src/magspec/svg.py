"""Minimal deterministic SVG line charts.

Coordinates are written with a fixed number of decimals so identical inputs
give byte-identical documents.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import DomainError

PANEL_W = 420
PANEL_H = 320
MARGIN = (48, 20, 40, 28)  # left, right, bottom, top


def _f(x: float) -> str:
    s = f"{x:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


@dataclass(frozen=True)
class Series:
    x: tuple
    y: tuple
    dotted: bool = False
    stroke_width: float = 1.0
    color: str = "#000000"


@dataclass(frozen=True)
class Panel:
    title: str
    xlim: tuple
    ylim: tuple
    series: tuple
    xticks: tuple = ()
    yticks: tuple = ()
    xlabel: str = "B"
    ylabel: str = ""
    extra: dict = field(default_factory=dict, compare=False)


def _panel_svg(panel: Panel, ox: float, index: int) -> list:
    left, right, bottom, top = MARGIN
    w = PANEL_W - left - right
    h = PANEL_H - top - bottom
    x0, x1 = panel.xlim
    y0, y1 = panel.ylim
    if not (x1 > x0 and y1 > y0):
        raise DomainError("panel limits must be increasing")

    def px(x):
        return ox + left + (x - x0) / (x1 - x0) * w

    def py(y):
        return top + (y1 - y) / (y1 - y0) * h

    clip = f"clip{index}"
    out = [f'<clipPath id="{clip}"><rect x="{_f(px(x0))}" y="{_f(py(y1))}" '
           f'width="{_f(w)}" height="{_f(h)}"/></clipPath>',
           f'<g clip-path="url(#{clip})" fill="none">']
    for s in panel.series:
        if len(s.x) != len(s.y) or not s.x:
            raise DomainError("series needs equal, non-zero numbers of x and y values")
        pts = " ".join(f"{_f(px(a))},{_f(py(b))}" for a, b in zip(s.x, s.y))
        dash = ' stroke-dasharray="2,3"' if s.dotted else ""
        out.append(f'<polyline points="{pts}" stroke="{s.color}" '
                   f'stroke-width="{_f(s.stroke_width)}"{dash}/>')
    out.append("</g>")
    out.append(f'<rect x="{_f(px(x0))}" y="{_f(py(y1))}" width="{_f(w)}" height="{_f(h)}" '
               'fill="none" stroke="#000000" stroke-width="1"/>')
    for t in panel.xticks:
        out.append(f'<line x1="{_f(px(t))}" y1="{_f(py(y0))}" x2="{_f(px(t))}" '
                   f'y2="{_f(py(y0) + 4)}" stroke="#000000"/>')
        out.append(f'<text x="{_f(px(t))}" y="{_f(py(y0) + 16)}" '
                   f'text-anchor="middle">{_f(t)}</text>')
    for t in panel.yticks:
        out.append(f'<line x1="{_f(px(x0) - 4)}" y1="{_f(py(t))}" x2="{_f(px(x0))}" '
                   f'y2="{_f(py(t))}" stroke="#000000"/>')
        out.append(f'<text x="{_f(px(x0) - 7)}" y="{_f(py(t) + 4)}" '
                   f'text-anchor="end">{_f(t)}</text>')
    out.append(f'<text x="{_f(px(0.5 * (x0 + x1)))}" y="{_f(PANEL_H - 6)}" '
               f'text-anchor="middle">{escape(panel.xlabel)}</text>')
    out.append(f'<text x="{_f(px(0.5 * (x0 + x1)))}" y="{_f(top - 10)}" '
               f'text-anchor="middle">{escape(panel.title)}</text>')
    return out


def render(panels: Sequence[Panel]) -> str:
    """Side-by-side panels as one SVG document."""
    if not panels:
        raise DomainError("nothing to draw")
    width = PANEL_W * len(panels)
    lines = ['<?xml version="1.0" encoding="UTF-8"?>',
             f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" '
             f'viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif" font-size="11">',
             f'<rect width="{width}" height="{PANEL_H}" fill="#ffffff"/>']
    for i, p in enumerate(panels):
        lines.extend(_panel_svg(p, i * PANEL_W, i))
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def envelope(curves: Sequence[Sequence[float]]) -> np.ndarray:
    """Pointwise minimum of equally sampled curves."""
    arr = np.asarray(curves, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise DomainError("envelope needs at least one curve")
    return arr.min(axis=0)
