"""Ground-state energies over field strength and their analysis.

``lambda_1(H(B)) = min_m lambda_1(H_m(B))``: :func:`ground_state` scans an
adaptive window of angular momenta around the localization prediction,
:func:`sweep` repeats that over a B grid, and the remaining functions compare
sweeps with the limit operator on thin annuli and with the large-B expansions.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from . import field as fieldmod
from .discretize import Domain, build_fiber, default_grid_n, localization_length, truncation_window
from .eigen import eigenvector, smallest_eigenvalues
from .errors import ConfigError, DomainError, NumericalError, ResolutionError
from .models import model_constants

MAX_FIBERS = 10_000
EDGE_MARGIN = 3
TIE_TOL = 1e-10
LOCALIZATION_RADIUS = 10.0

MODELS = ("Exterior", "Interior", "PlaneDeltaPos", "PlaneDeltaZero", "AnnulusLimit")


class RunawayError(NumericalError):
    """The angular-momentum window kept growing without bracketing the minimum."""


@dataclass(frozen=True)
class SpectralPoint:
    B: float
    lambda1: float
    m_star: int
    window: tuple
    localization_metric: float
    ties: tuple = ()
    n: int = 0
    fibers_evaluated: int = 0
    error_estimate: Optional[float] = None


@dataclass(frozen=True)
class SweepTable:
    points: tuple
    domain: Domain
    field: fieldmod.RadialField
    grid_n: Optional[int] = None

    def __post_init__(self):
        b = [p.B for p in self.points]
        if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise DomainError("sweep points must have strictly increasing B")

    def __len__(self):
        return len(self.points)

    @property
    def B(self) -> np.ndarray:
        return np.array([p.B for p in self.points])

    @property
    def lambda1(self) -> np.ndarray:
        return np.array([p.lambda1 for p in self.points])

    @property
    def m_star(self) -> np.ndarray:
        return np.array([p.m_star for p in self.points])


def _xi0(constants=None) -> float:
    return (constants or model_constants()).xi0


def _round(x: float) -> int:
    return int(math.floor(x + 0.5))


def m_window(fld, domain: Domain, B: float, constants=None):
    """Initial angular-momentum window ``(m_lo, m_hi)``.

    The centre is the flux enclosed by the localization circle, ``Phi B``, moved
    by ``-/+ xi0 (delta B)^{1/2}`` for the disc and its exterior when delta > 0.
    On the annulus the same boundary-layer prediction is made at the outer
    circle and clamped to the fluxes through the two circles, which is the
    inner flux for thin rings. The half-width is ``max(8, 4 B^{1/4})``.
    """
    if B < 0:
        raise DomainError("field strength B must be >= 0")
    if domain.kind == "annulus":
        inner = B * fieldmod.enclosed_flux(fld, domain.ri)
        outer = B * fieldmod.enclosed_flux(fld, domain.ro)
        layer = _xi0(constants) * math.sqrt(fieldmod.eval_beta(fld, domain.ro) * B) * domain.ro
        centre = min(max(outer - layer, inner), outer)
    else:
        centre = B * fieldmod.flux(fld)
        if domain.kind in ("disc", "exterior") and fld.delta > 0:
            shift = _xi0(constants) * math.sqrt(fld.delta * B)
            centre += shift if domain.kind == "exterior" else -shift
    half = max(8, math.ceil(4.0 * B ** 0.25))
    c = _round(centre)
    return (c - half, c + half)


def fiber_lambda(fld, domain: Domain, m: int, B: float, n: Optional[int] = None) -> float:
    """Lowest eigenvalue of one fiber."""
    return float(smallest_eigenvalues(build_fiber(domain, fld, m, B, n), 1)[0])


def localization_profile(fld, B: float, T, vector) -> float:
    """Fraction of ``|u|^2 r dr`` lying further than ten Agmon lengths from r = 1."""
    radius = LOCALIZATION_RADIUS * localization_length(fld, B)
    r = T.grid.nodes
    mass = T.weight * np.asarray(vector) ** 2
    total = mass.sum()
    return float(mass[np.abs(r - 1.0) > radius].sum() / total)


def ground_state(fld, domain: Domain, B: float, n: Optional[int] = None,
                 constants=None, refine: bool = False) -> SpectralPoint:
    """``inf_m lambda_1(H_m(B))`` over an adaptively widened window of m.

    The window grows by its half-width on whichever side the minimum comes
    within ``EDGE_MARGIN`` of. With ``refine`` the minimizing fiber is re-solved
    on twice as many cells and the two values are Richardson-extrapolated.
    """
    if B < 0:
        raise DomainError("field strength B must be >= 0")
    if n is None:
        n = default_grid_n(domain, fld, B)
    lo, hi = m_window(fld, domain, B, constants)
    half = (hi - lo) // 2
    values = {}

    def evaluate(ms):
        for m in ms:
            if len(values) >= MAX_FIBERS:
                raise RunawayError(f"more than {MAX_FIBERS} fibers at B = {B:g}; check the "
                                   "field flux or the grid")
            values[m] = fiber_lambda(fld, domain, m, B, n)

    evaluate(range(lo, hi + 1))
    while True:
        best = min(values.values())
        m_star = min(m for m, v in values.items() if v - best <= TIE_TOL)
        if m_star - lo < EDGE_MARGIN:
            new_lo = lo - half
            evaluate(range(new_lo, lo))
            lo = new_lo
        elif hi - m_star < EDGE_MARGIN:
            new_hi = hi + half
            evaluate(range(hi + 1, new_hi + 1))
            hi = new_hi
        else:
            break
    ties = tuple(sorted(m for m, v in values.items() if m != m_star and v - best <= TIE_TOL))
    T = build_fiber(domain, fld, m_star, B, n)
    pair = eigenvector(T, values[m_star])
    metric = localization_profile(fld, B, T, pair.vector)
    lam, err = best, None
    if refine:
        fine = fiber_lambda(fld, domain, m_star, B, 2 * n)
        coarse = values[m_star]
        lam = (4.0 * fine - coarse) / 3.0
        err = abs(fine - coarse) / 3.0
    return SpectralPoint(float(B), float(max(lam, 0.0)), int(m_star), (int(lo), int(hi)),
                         metric, ties, int(n), len(values), err)


def _ground_state_task(args):
    fld, domain, B, n, constants, refine = args
    return ground_state(fld, domain, B, n, constants, refine)


def sweep(fld, domain: Domain, B_grid: Sequence[float], n: Optional[int] = None,
          workers: int = 1, refine: bool = False, constants=None) -> SweepTable:
    """Ground states over ``B_grid`` in grid order, optionally across processes.

    ``n`` fixes the number of cells for every B (the default adapts to B).
    """
    B_grid = [float(b) for b in B_grid]
    if not B_grid:
        raise DomainError("empty B grid")
    if any(b2 <= b1 for b1, b2 in zip(B_grid, B_grid[1:])):
        raise DomainError("B grid must be strictly increasing")
    if fld.delta > 0 and domain.kind in ("disc", "exterior") and constants is None:
        constants = model_constants()
    if constants is not None:
        lo, hi = truncation_window(domain, fld, max(B_grid[-1], 1e-12)) \
            if not domain.bounded else truncation_window(domain, fld, 0.0)
        fieldmod.check_assumptions(fld, domain.kind, np.linspace(max(lo, 1e-9), hi, 257),
                                   constants.theta0)
    tasks = [(fld, domain, b, n, constants, refine) for b in B_grid]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_ground_state_task, tasks,
                                   chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        points = [_ground_state_task(t) for t in tasks]
    return SweepTable(tuple(points), domain, fld, n)


def limit_operator_lambda(ri: float, B: float):
    """Lowest eigenvalue of the circle operator ``(i/Ri d/dtheta - B Ri/2)^2`` and its m.

    On ties the smaller m is reported.
    """
    if ri <= 0 or B < 0:
        raise DomainError("need Ri > 0 and B >= 0")
    x = B * ri * ri / 2.0
    best = None
    for m in (math.floor(x), math.floor(x) + 1):
        val = (m / ri - B * ri / 2.0) ** 2
        if best is None or val < best[0]:
            best = (val, int(m))
    return best


def annulus_limit_error(ri: float, ro_sequence: Sequence[float], B: float,
                        n: Optional[int] = None, fld=None):
    """``|lambda_1(H(B)) - lambda_1(A(B))|`` on annuli ``(ri, ro)`` for each ``ro``."""
    fld = fld or fieldmod.Constant(1.0)
    limit, _ = limit_operator_lambda(ri, B)
    return [abs(ground_state(fld, Domain("annulus", ri, ro), B, n).lambda1 - limit)
            for ro in ro_sequence]


def monotonicity_breaks(table: SweepTable):
    """Pairs ``(B1, B2)``, ``B1 < B2``, with ``lambda1(B1) > lambda1(B2)``.

    Every pair of grid points lying in the same maximal strictly decreasing run
    is reported, which includes all adjacent descents and the run end points.
    An empty list means the table is non-decreasing.
    """
    if len(table) < 3:
        raise DomainError("monotonicity analysis needs at least 3 points")
    B, lam = table.B, table.lambda1
    pairs = []
    i = 0
    while i < len(B) - 1:
        j = i
        while j < len(B) - 1 and lam[j + 1] < lam[j]:
            j += 1
        for a in range(i, j):
            for b in range(a + 1, j + 1):
                pairs.append((float(B[a]), float(B[b])))
        i = max(j, i + 1)
    return pairs


@dataclass(frozen=True)
class AsymptoticFit:
    model: str
    B: tuple
    leading: tuple
    residual: tuple
    C0: Optional[float] = None
    C1: Optional[float] = None
    amplitude: Optional[float] = None
    expected_amplitude: Optional[float] = None
    rms: float = 0.0
    max_abs: float = 0.0
    period: Optional[float] = None
    expected_period: Optional[float] = None
    fit_residual: tuple = dc_field(default=(), repr=False)

    def report(self) -> dict:
        out = {"model": self.model, "points": len(self.B), "rms_residual": self.rms,
               "max_abs_residual": self.max_abs}
        for key in ("C0", "C1", "amplitude", "expected_amplitude", "period", "expected_period"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.model == "PlaneDeltaPos":
            out["mean_residual"] = float(np.mean(self.residual))
        return out


def _dist_to_integer(x):
    return np.abs(x - np.floor(x + 0.5))


def _fit_phase(phase, resid, samples=200):
    """Scan the phase offset, solving for amplitude and offset at each sample."""
    def sse(c0):
        delta2 = _dist_to_integer(phase + c0) ** 2
        A = np.column_stack([delta2, np.ones_like(delta2)])
        coef, *_ = np.linalg.lstsq(A, resid, rcond=None)
        return float(np.sum((A @ coef - resid) ** 2)), coef

    grid = np.arange(samples) / samples
    errs = [sse(c)[0] for c in grid]
    c_best = float(grid[int(np.argmin(errs))])
    fine = c_best + (np.arange(-samples, samples + 1) / samples) / samples
    errs = [sse(c)[0] for c in fine]
    c_best = float(fine[int(np.argmin(errs))] % 1.0)
    err, (amp, offset) = sse(c_best)
    return c_best, float(amp), float(offset)


def oscillation_period(table: SweepTable) -> float:
    """Mean spacing in B between successive changes of the minimizing fiber."""
    B, m = table.B, table.m_star
    steps = np.diff(m)
    if np.any(np.abs(steps) > 1):
        raise ResolutionError("the minimizing fiber jumps by more than one between grid "
                              "points; the oscillation is not resolved")
    idx = np.nonzero(steps)[0]
    if len(idx) < 2:
        raise ResolutionError("fewer than two fiber transitions; the period is not resolved")
    switches = 0.5 * (B[idx] + B[idx + 1])
    return float((switches[-1] - switches[0]) / (len(switches) - 1))


def asymptotic_fit(table: SweepTable, model: str, constants=None,
                   oscillation: bool = True) -> AsymptoticFit:
    """Subtract the closed-form leading terms and fit the oscillatory remainder.

    For the oscillatory models the remainder is fitted by
    ``A (Delta_B^2 + C1)`` with ``Delta_B`` the distance of ``f(B) + C0`` to the
    integers; ``C0`` is scanned, ``A`` and ``A C1`` solved by least squares.
    """
    if model not in MODELS:
        raise ConfigError(f"unknown asymptotic model {model!r}; choose from {MODELS}")
    constants = constants or model_constants()
    fld, domain = table.field, table.domain
    B = table.B
    lam = table.lambda1
    phi = fieldmod.flux(fld)
    delta, k = fld.delta, fld.k
    phase = slope = None
    expected = None
    if model in ("Exterior", "Interior"):
        if delta <= 0:
            raise ConfigError(f"{model} expansion needs delta > 0")
        sign = 1.0 if model == "Exterior" else -1.0
        root = np.sqrt(delta * B)
        leading = constants.theta0 * delta * B + sign * constants.phi0sq / 3.0 * root
        phase = phi * B + sign * constants.xi0 * root
        slope = phi + sign * constants.xi0 * math.sqrt(delta) / (2.0 * np.sqrt(B))
        expected = constants.xi0 * constants.phi0sq
    elif model == "PlaneDeltaPos":
        if delta <= 0:
            raise ConfigError("PlaneDeltaPos needs delta > 0")
        leading = delta * B + k / (4.0 * delta)
        oscillation = False
    elif model == "PlaneDeltaZero":
        leading = math.sqrt(k / 2.0) * constants.Xi * np.sqrt(B)
        phase = phi * B
        slope = np.full_like(B, phi)
        expected = constants.c0 / 2.0
    else:
        if domain.kind != "annulus":
            raise ConfigError("AnnulusLimit needs an annulus sweep")
        leading = np.array([limit_operator_lambda(domain.ri, b)[0] for b in B])
        oscillation = False
    resid = lam - leading
    kw = {}
    if oscillation and phase is not None:
        if len(B) < 4:
            raise ResolutionError("an oscillation fit needs at least 4 points")
        c0, amp, offset = _fit_phase(phase, resid)
        fitted = amp * _dist_to_integer(phase + c0) ** 2 + offset
        kw = dict(C0=c0, amplitude=amp, C1=offset / amp if amp != 0 else math.inf,
                  expected_amplitude=expected, period=oscillation_period(table),
                  expected_period=float(1.0 / np.mean(slope)),
                  fit_residual=tuple((resid - fitted).tolist()))
    elif expected is not None:
        kw = dict(expected_amplitude=expected)
    return AsymptoticFit(model, tuple(B.tolist()), tuple(np.asarray(leading).tolist()),
                         tuple(resid.tolist()), rms=float(np.sqrt(np.mean(resid ** 2))),
                         max_abs=float(np.max(np.abs(resid))), **kw)
