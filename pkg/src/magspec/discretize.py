"""Finite-difference discretization of the angular-momentum fibers.

The fiber operator with angular momentum ``m`` acts in L^2(I, r dr) and has
quadratic form

    q_m[u] = int_I ( |u'|^2 + (m/r - B a(r))^2 |u|^2 ) r dr.

The form is discretized directly on a cell-centred uniform grid: node ``i`` sits
at the midpoint of cell ``i``, kinetic fluxes are weighted by ``r`` at the cell
faces and the mass matrix is ``diag(r_i h)``. Natural (Neumann) conditions need
no ghost values; a Dirichlet end adds the half-cell flux ``2 p_b / h``. The
resulting generalized problem ``K u = lambda M u`` is symmetrized by
``T = M^{-1/2} K M^{-1/2}``.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import field as fieldmod
from .errors import ConfigError, DomainError, ResolutionError

DOMAIN_KINDS = ("annulus", "disc", "exterior", "plane")
NEUMANN, DIRICHLET = "neumann", "dirichlet"

MIN_NODES = 16
MAX_NODES = 200_000
NODES_PER_LENGTH = 200   # default: h <= localization length / 200
MIN_NODES_PER_LENGTH = 20


@dataclass(frozen=True)
class Domain:
    kind: str
    ri: float = 0.0
    ro: float = 0.0
    truncation_width_factor: float = 12.0
    inner_cutoff: float = 0.05

    def __post_init__(self):
        if self.kind not in DOMAIN_KINDS:
            raise ConfigError(f"unknown domain kind {self.kind!r}")
        if self.kind == "annulus" and not 0 < self.ri < self.ro:
            raise ConfigError(f"annulus needs 0 < Ri < Ro, got Ri={self.ri}, Ro={self.ro}")
        if self.truncation_width_factor < 6:
            raise ConfigError("truncation_width_factor must be >= 6")
        if not 0 < self.inner_cutoff < 1:
            raise ConfigError("inner_cutoff must lie in (0, 1)")

    @property
    def bounded(self) -> bool:
        return self.kind in ("annulus", "disc")

    def __str__(self):
        if self.kind == "annulus":
            return f"annulus:{self.ri:g}:{self.ro:g}"
        return self.kind


def Annulus(ri: float, ro: float, **kw) -> Domain:
    return Domain("annulus", float(ri), float(ro), **kw)


def Disc(**kw) -> Domain:
    return Domain("disc", **kw)


def ExteriorDisc(**kw) -> Domain:
    return Domain("exterior", **kw)


def Plane(**kw) -> Domain:
    return Domain("plane", **kw)


def parse_domain(text: str, **kw) -> Domain:
    """Parse ``annulus:<Ri>:<Ro>``, ``disc``, ``exterior`` or ``plane``."""
    parts = [p.strip() for p in text.strip().split(":")]
    kind = parts[0].lower()
    if kind == "annulus":
        if len(parts) != 3:
            raise ConfigError("annulus needs the form annulus:<Ri>:<Ro>")
        try:
            ri, ro = float(parts[1]), float(parts[2])
        except ValueError:
            raise ConfigError(f"malformed annulus radii in {text!r}") from None
        return Annulus(ri, ro, **kw)
    if kind in ("exterior", "exteriordisc"):
        kind = "exterior"
    if kind not in DOMAIN_KINDS or len(parts) != 1:
        raise ConfigError(f"unknown domain {text!r}")
    return Domain(kind, **kw)


@dataclass(frozen=True)
class Grid:
    """Cell-centred uniform grid on ``[r_min, r_max]`` with ``n`` cells."""

    r_min: float
    r_max: float
    n: int

    def __post_init__(self):
        if not self.r_max > self.r_min:
            raise DomainError("grid needs r_max > r_min")
        if self.n < 1:
            raise DomainError("grid needs at least one node")

    @property
    def h(self) -> float:
        return (self.r_max - self.r_min) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return self.r_min + (np.arange(self.n) + 0.5) * self.h

    @property
    def faces(self) -> np.ndarray:
        return self.r_min + np.arange(self.n + 1) * self.h


@dataclass(frozen=True, eq=False)
class SymmetricTridiagonal:
    """Symmetric tridiagonal matrix together with the mass used to symmetrize it.

    ``floor`` is an a-priori lower bound on the spectrum (the minimum of the
    potential for fiber operators) or ``None``.
    """

    diag: np.ndarray
    offdiag: np.ndarray
    weight: np.ndarray
    grid: Optional[Grid] = None
    floor: Optional[float] = None

    def __post_init__(self):
        n = len(self.diag)
        if len(self.offdiag) != max(n - 1, 0) or len(self.weight) != n:
            raise DomainError("inconsistent tridiagonal lengths")
        if np.any(self.weight <= 0):
            raise DomainError("weights must be positive")

    @classmethod
    def from_arrays(cls, diag, offdiag, weight=None):
        diag = np.ascontiguousarray(diag, dtype=float)
        offdiag = np.ascontiguousarray(offdiag, dtype=float)
        weight = np.ones_like(diag) if weight is None else np.ascontiguousarray(weight, float)
        return cls(diag, offdiag, weight)

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def norm_inf(self) -> float:
        row = np.abs(self.diag).copy()
        row[:-1] += np.abs(self.offdiag)
        row[1:] += np.abs(self.offdiag)
        return float(row.max())

    def to_dense(self) -> np.ndarray:
        return (np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1))

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out


def sturm_liouville(grid: Grid, p_faces, q_nodes, w_nodes, left=NEUMANN, right=NEUMANN,
                    floor=None) -> SymmetricTridiagonal:
    """Discretize ``int p |u'|^2 + q w |u|^2`` against the mass ``int w |u|^2``.

    ``p_faces`` has ``n + 1`` entries (cell faces), ``q_nodes`` and ``w_nodes``
    have ``n`` entries.
    """
    h = grid.h
    p = np.asarray(p_faces, dtype=float)
    mass = np.asarray(w_nodes, dtype=float) * h
    stiff = (p[:-1] + p[1:]) / h
    if left == NEUMANN:
        stiff[0] -= p[0] / h
    else:
        stiff[0] += p[0] / h
    if right == NEUMANN:
        stiff[-1] -= p[-1] / h
    else:
        stiff[-1] += p[-1] / h
    diag = stiff / mass + np.asarray(q_nodes, dtype=float)
    off = -p[1:-1] / (h * np.sqrt(mass[:-1] * mass[1:]))
    return SymmetricTridiagonal(np.ascontiguousarray(diag), np.ascontiguousarray(off),
                                mass, grid, floor)


def potential(fld, m: int, B: float, r):
    """Fiber potential ``(m/r - B a(r))^2`` in the form ``(m - B r a(r))^2 / r^2``.

    The second form avoids the cancellation between ``m/r`` and ``B a(r)`` when
    ``m`` is close to ``Phi B``.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0):
        raise DomainError("potential needs r > 0")
    if B < 0:
        raise DomainError("field strength B must be >= 0")
    out = (m - B * fieldmod.enclosed_flux(fld, arr)) ** 2 / arr ** 2
    return float(out) if np.ndim(out) == 0 else out


def localization_length(fld, B: float) -> float:
    """Agmon length scale around r = 1: ``B^{-1/2}`` if delta > 0, else ``B^{-1/4}``."""
    if B <= 0:
        return math.inf
    return B ** -0.5 if fld.delta > 0 else B ** -0.25


def truncation_window(domain: Domain, fld, B: float):
    """Radial interval on which the fiber problem is solved.

    Bounded domains return their physical interval. Unbounded ones are cut at
    ``truncation_width_factor`` localization lengths from r = 1.
    """
    if B < 0:
        raise DomainError("field strength B must be >= 0")
    if domain.kind == "annulus":
        return (domain.ri, domain.ro)
    if domain.kind == "disc":
        return (0.0, 1.0)
    if B <= 0:
        raise DomainError("unbounded domains need B > 0 for a truncation window")
    half = domain.truncation_width_factor * localization_length(fld, B)
    if domain.kind == "exterior":
        return (1.0, 1.0 + half)
    return (max(1.0 - half, domain.inner_cutoff), 1.0 + half)


def boundary_conditions(domain: Domain):
    if domain.kind in ("annulus", "disc"):
        return NEUMANN, NEUMANN
    if domain.kind == "exterior":
        return NEUMANN, DIRICHLET
    return DIRICHLET, DIRICHLET


def default_grid_n(domain: Domain, fld, B: float, window=None) -> int:
    lo, hi = window or truncation_window(domain, fld, B)
    width = hi - lo
    ell = min(localization_length(fld, B), width)
    n = math.ceil(NODES_PER_LENGTH * width / ell)
    return int(min(max(n, MIN_NODES), MAX_NODES))


def minimum_grid_n(domain: Domain, fld, B: float, window=None) -> int:
    lo, hi = window or truncation_window(domain, fld, B)
    width = hi - lo
    ell = min(localization_length(fld, B), width)
    return max(MIN_NODES, math.ceil(MIN_NODES_PER_LENGTH * width / ell))


def check_compatible(domain: Domain, fld):
    if domain.kind == "plane" and fld.k <= 0:
        raise ConfigError("the plane needs a field with a non-degenerate well at r = 1 "
                          "(k > 0), e.g. parabolic:<delta>")


class _BaseCache:
    """Small LRU cache of the B- and m-independent parts of a fiber grid."""

    def __init__(self, size=32):
        self.size = size
        self.data = OrderedDict()

    def get(self, fld, lo, hi, n, bcs):
        key = (fld.kind, fld.delta, fld.level, fld.k,
               id(fld.profile) if fld.profile is not None else None, lo, hi, n, bcs)
        hit = self.data.get(key)
        if hit is not None:
            self.data.move_to_end(key)
            return hit
        grid = Grid(lo, hi, n)
        r = grid.nodes
        faces = grid.faces
        zero = sturm_liouville(grid, faces, np.zeros(n), r, *bcs)
        flux_nodes = fieldmod.enclosed_flux(fld, r)
        beta = np.atleast_1d(fieldmod.eval_beta(fld, r))
        if np.any(beta < 0):
            raise ConfigError("field profile is negative on the working grid")
        hit = (grid, zero.diag, zero.offdiag, zero.weight, r, flux_nodes)
        self.data[key] = hit
        if len(self.data) > self.size:
            self.data.popitem(last=False)
        return hit


_BASES = _BaseCache()


def build_fiber(domain: Domain, fld, m: int, B: float, n: Optional[int] = None,
                window=None) -> SymmetricTridiagonal:
    """Symmetric tridiagonal matrix of the fiber with angular momentum ``m``.

    ``n`` defaults to :func:`default_grid_n`; ``window`` overrides the radial
    interval (used for truncation-robustness checks).
    """
    if B < 0:
        raise DomainError("field strength B must be >= 0")
    check_compatible(domain, fld)
    lo, hi = window or truncation_window(domain, fld, B)
    if n is None:
        n = default_grid_n(domain, fld, B, (lo, hi))
    n = int(n)
    need = minimum_grid_n(domain, fld, B, (lo, hi))
    if n < need:
        raise ResolutionError(f"n = {n} is too small for the window [{lo:g}, {hi:g}] "
                              f"at B = {B:g}; need n >= {need}", minimum=need)
    bcs = boundary_conditions(domain)
    if window is not None and not domain.bounded:
        bcs = (NEUMANN if lo == 1.0 and domain.kind == "exterior" else DIRICHLET, DIRICHLET)
    grid, kdiag, off, weight, r, flux_nodes = _BASES.get(fld, lo, hi, n, bcs)
    pot = (m - B * flux_nodes) ** 2 / r ** 2
    return SymmetricTridiagonal(kdiag + pot, off, weight, grid, float(pot.min()))
