"""Two-panel figure of the circle-limit and annulus fiber spectra.

Left: the parabolas ``(m - B/2)^2`` of the unit-circle limit operator for
m = 0..6 and their lower envelope on 0 <= B <= 10. Right: the lowest fiber
eigenvalues on the annulus 1 < r < 3/2 with a uniform field, m = 0..6, and
their envelope on 0 <= B <= 8.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import svg
from .discretize import Annulus
from .errors import DomainError
from .field import Constant
from .scan import fiber_lambda, limit_operator_lambda

M_VALUES = tuple(range(7))
LEFT_B_MAX = 10
RIGHT_B_MAX = 8
SAMPLES_PER_UNIT = 50
RIGHT_N = 400
ANNULUS = (1.0, 1.5)


@dataclass(frozen=True)
class FigureTable:
    """Curves sampled on a common B grid; ``curves[j]`` belongs to ``M_VALUES[j]``."""

    B: tuple
    curves: tuple
    envelope: tuple


def _grid(b_max: int, per_unit: int) -> np.ndarray:
    # exact at integers: B = i / per_unit
    return np.arange(b_max * per_unit + 1) / per_unit


def left_table(per_unit: int = SAMPLES_PER_UNIT) -> FigureTable:
    B = _grid(LEFT_B_MAX, per_unit)
    curves = tuple(tuple(((m - B / 2.0) ** 2).tolist()) for m in M_VALUES)
    env = tuple(limit_operator_lambda(1.0, float(b))[0] for b in B)
    return FigureTable(tuple(B.tolist()), curves, env)


def right_table(per_unit: int = SAMPLES_PER_UNIT, n: int = RIGHT_N) -> FigureTable:
    B = _grid(RIGHT_B_MAX, per_unit)
    dom, fld = Annulus(*ANNULUS), Constant(1.0)
    # eigenvalues of a nonnegative operator; bisection noise at 0 is clipped
    curves = tuple(tuple(max(0.0, fiber_lambda(fld, dom, m, float(b), n)) for b in B)
                   for m in M_VALUES)
    env = tuple(svg.envelope(curves).tolist())
    return FigureTable(tuple(B.tolist()), curves, env)


def figure_tables(per_unit: int = SAMPLES_PER_UNIT, n: int = RIGHT_N):
    return left_table(per_unit), right_table(per_unit, n)


def emit_figure(tables) -> str:
    """SVG document for ``(left, right)`` tables."""
    if len(tables) != 2 or any(not t.B for t in tables):
        raise DomainError("figure needs a left and a right table, both non-empty")
    left, right = tables
    panels = []
    for tab, b_max, ymax, title in ((left, LEFT_B_MAX, 2.0, "circle limit, Ri = 1"),
                                    (right, RIGHT_B_MAX, 3.0, "annulus 1 < r < 3/2")):
        series = [svg.Series(tab.B, c, dotted=True, stroke_width=0.8, color="#555555")
                  for c in tab.curves]
        series.append(svg.Series(tab.B, tab.envelope, stroke_width=1.8))
        panels.append(svg.Panel(title, (0.0, float(b_max)), (0.0, ymax), tuple(series),
                                xticks=tuple(range(0, b_max + 1, 2)),
                                yticks=tuple(np.arange(0.0, ymax + 1e-9, 0.5).tolist())))
    return svg.render(panels)
