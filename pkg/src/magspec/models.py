"""Universal constants of the de Gennes and Montgomery model operators.

de Gennes:   -d^2/drho^2 + (rho - xi)^2 on (0, inf), Neumann at 0.
Montgomery:  -d^2/drho^2 + (rho^3/3 - alpha)^2 on the real line.

Both are truncated to a finite window with a Dirichlet end and discretized with
the same cell-centred scheme as the fibers. Every constant is computed on two
grids (n and 2n cells) and Richardson-extrapolated, since all errors are O(h^2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .discretize import DIRICHLET, NEUMANN, Grid, SymmetricTridiagonal, sturm_liouville
from .eigen import EigenPair, eigenvector, regularized_solve, smallest_eigenvalues
from .errors import NumericalError, ResolutionError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
XI_BRACKET = (0.5, 1.1)

DG_DEFAULT_N = 4000
DG_DEFAULT_L = 12.0
M_DEFAULT_N = 4000
M_DEFAULT_L = 8.0


def richardson(coarse, fine, order=2):
    """Extrapolate two values computed at h and h/2 with error ~ h**order."""
    f = 2.0 ** order
    return (f * fine - coarse) / (f - 1.0)


# ---------------------------------------------------------------- de Gennes

def degennes_matrix(xi: float, n: int = DG_DEFAULT_N, L: float = DG_DEFAULT_L) -> SymmetricTridiagonal:
    if n < 1000:
        raise ResolutionError(f"de Gennes grid needs n >= 1000, got {n}", minimum=1000)
    if L < xi + 8:
        raise ResolutionError(f"de Gennes window L = {L} is too short for xi = {xi}; "
                              f"need L >= {xi + 8}", minimum=xi + 8)
    grid = Grid(0.0, float(L), int(n))
    rho = grid.nodes
    return sturm_liouville(grid, np.ones(n + 1), (rho - xi) ** 2, np.ones(n),
                           NEUMANN, DIRICHLET, floor=0.0)


def degennes_curve(xi: float, n: int = DG_DEFAULT_N, L: float = DG_DEFAULT_L) -> float:
    """Lowest eigenvalue of the de Gennes operator with parameter ``xi``."""
    return float(smallest_eigenvalues(degennes_matrix(xi, n, L), 1)[0])


@dataclass(frozen=True, eq=False)
class ModelGround:
    """Ground state of a model operator on one grid."""

    param: float
    value: float
    pair: EigenPair
    T: SymmetricTridiagonal

    @property
    def rho(self) -> np.ndarray:
        return self.T.grid.nodes

    @property
    def h(self) -> float:
        return self.T.grid.h

    @property
    def phi(self) -> np.ndarray:
        return self.pair.vector


def degennes_ground(xi: float, n: int = DG_DEFAULT_N, L: float = DG_DEFAULT_L) -> ModelGround:
    T = degennes_matrix(xi, n, L)
    lam = float(smallest_eigenvalues(T, 1)[0])
    return ModelGround(xi, lam, eigenvector(T, lam), T)


def boundary_value(ground: ModelGround) -> float:
    """phi(0) from the first three cell centres (h/2, 3h/2, 5h/2), quadratic fit."""
    p = ground.phi
    return (15.0 * p[0] - 10.0 * p[1] + 3.0 * p[2]) / 8.0


def _xi_derivative(ground: ModelGround) -> float:
    # exact derivative of the discrete eigenvalue (Feynman-Hellmann)
    return float(-2.0 * np.sum(ground.T.weight * ground.phi ** 2 * (ground.rho - ground.param)))


def degennes_minimum(n: int = DG_DEFAULT_N, L: float = DG_DEFAULT_L) -> ModelGround:
    """Minimize the de Gennes curve on one grid.

    Golden-section search over ``XI_BRACKET`` down to width 1e-10, followed by
    secant steps on the exact discrete derivative: the eigenvalue is too flat
    near its minimum for function values alone to fix ``xi0`` to better than
    about 1e-6.
    """
    a, b = XI_BRACKET
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = degennes_curve(c, n, L), degennes_curve(d, n, L)
    while b - a > 1e-10:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = degennes_curve(c, n, L)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = degennes_curve(d, n, L)
    xi = 0.5 * (a + b)
    if min(xi - XI_BRACKET[0], XI_BRACKET[1] - xi) < 1e-6:
        raise NumericalError(f"de Gennes minimum {xi} sits on the bracket edge")
    g0 = degennes_ground(xi, n, L)
    x1 = xi + 1e-6
    g1 = degennes_ground(x1, n, L)
    d0, d1 = _xi_derivative(g0), _xi_derivative(g1)
    x0 = xi
    for _ in range(30):
        if d1 == d0:
            break
        x2 = x1 - d1 * (x1 - x0) / (d1 - d0)
        x0, d0 = x1, d1
        x1 = x2
        g1 = degennes_ground(x1, n, L)
        d1 = _xi_derivative(g1)
        if abs(x1 - x0) < 1e-14:
            break
    if abs(x1 - xi) > 1e-4:
        raise NumericalError("secant refinement of xi0 left the golden-section bracket")
    return g1


@dataclass(frozen=True)
class DeGennesConstants:
    theta0: float
    xi0: float
    phi0sq: float
    ddlambda_xi: float
    n: int
    L: float


def _second_difference(curve, x, step):
    return (curve(x + step) - 2.0 * curve(x) + curve(x - step)) / step ** 2


@lru_cache(maxsize=8)
def _degennes_pair(n: int, L: float):
    return degennes_minimum(n, L), degennes_minimum(2 * n, L)


def degennes_grounds(n: int = DG_DEFAULT_N, L: float = DG_DEFAULT_L):
    """Minimizing ground states on the n- and 2n-cell grids."""
    return _degennes_pair(int(n), float(L))


def degennes_constants(n: int = DG_DEFAULT_N, L: float = DG_DEFAULT_L) -> DeGennesConstants:
    coarse, fine = degennes_grounds(n, L)
    vals = {}
    for key, g, nn in (("c", coarse, n), ("f", fine, 2 * n)):
        vals[key] = dict(
            theta0=g.value, xi0=g.param, phi0sq=boundary_value(g) ** 2,
            dd=_second_difference(lambda x: degennes_curve(x, nn, L), g.param, 1e-3))
    ex = {k: richardson(vals["c"][k], vals["f"][k]) for k in vals["c"]}
    return DeGennesConstants(ex["theta0"], ex["xi0"], ex["phi0sq"], ex["dd"], int(n), float(L))


MOMENT_NAMES = ("<phi,phi>", "<phi,(rho-xi0)phi>", "<phi,(rho-xi0)^2 phi>",
                "<phi,(rho-xi0)^3 phi>", "<phi,rho phi>", "<phi,rho^3 phi>", "<phi,phi'>")


def _raw_moments(g: ModelGround) -> np.ndarray:
    w = g.T.weight
    p = g.phi
    t = g.rho - g.param
    rho = g.rho
    # central differences with the Neumann mirror at 0 and the Dirichlet ghost at L
    ext = np.concatenate(([p[0]], p, [-p[-1]]))
    dp = (ext[2:] - ext[:-2]) / (2.0 * g.h)
    return np.array([
        np.sum(w * p * p), np.sum(w * t * p * p), np.sum(w * t ** 2 * p * p),
        np.sum(w * t ** 3 * p * p), np.sum(w * rho * p * p), np.sum(w * rho ** 3 * p * p),
        np.sum(w * p * dp)])


def degennes_moments(constants, grounds):
    """Moments of the minimizing ground state and their deviations from the closed forms.

    ``grounds`` is one ground state or a (coarse, fine) pair, in which case the
    moments are Richardson-extrapolated. Returns a list of
    ``(name, value, target, |value - target|)``.
    """
    if isinstance(grounds, ModelGround):
        vals = _raw_moments(grounds)
    else:
        coarse, fine = grounds
        vals = richardson(_raw_moments(coarse), _raw_moments(fine))
    xi, phi2 = constants.xi0, constants.phi0sq
    targets = (1.0, 0.0, 0.5 * xi ** 2, phi2 / 6.0, xi, phi2 / 6.0 + 2.5 * xi ** 3, -0.5 * phi2)
    return [(name, float(v), float(t), abs(float(v) - t))
            for name, v, t in zip(MOMENT_NAMES, vals, targets)]


def _second_dg_raw(g: ModelGround) -> float:
    b = (g.rho - g.param) * g.phi
    x = regularized_solve(g.T, g.value, g.phi, b)
    return 1.0 - 4.0 * float(np.sum(g.T.weight * b * x))


def seconddG_identity(constants, grounds):
    """Evaluate ``1 - 4 <(rho-xi0) phi, R_reg (rho-xi0) phi>``.

    Returns ``(value, |value - xi0 phi0^2|)``; ``R_reg`` is the regularized
    resolvent at the minimum.
    """
    if isinstance(grounds, ModelGround):
        val = _second_dg_raw(grounds)
    else:
        val = richardson(_second_dg_raw(grounds[0]), _second_dg_raw(grounds[1]))
    return val, abs(val - constants.xi0 * constants.phi0sq)


# --------------------------------------------------------------- Montgomery

def montgomery_matrix(alpha: float, n: int = M_DEFAULT_N, L: float = M_DEFAULT_L) -> SymmetricTridiagonal:
    if n < 2000:
        raise ResolutionError(f"Montgomery grid needs n >= 2000, got {n}", minimum=2000)
    need = 6.0 + abs(3.0 * alpha) ** (1.0 / 3.0)
    if L < need:
        raise ResolutionError(f"Montgomery window L = {L} too short for alpha = {alpha}; "
                              f"need L >= {need:.4g}", minimum=need)
    grid = Grid(-float(L), float(L), int(n))
    rho = grid.nodes
    return sturm_liouville(grid, np.ones(n + 1), (rho ** 3 / 3.0 - alpha) ** 2, np.ones(n),
                           DIRICHLET, DIRICHLET, floor=0.0)


def montgomery_curve(alpha: float, n: int = M_DEFAULT_N, L: float = M_DEFAULT_L) -> float:
    """Lowest eigenvalue of the Montgomery operator with parameter ``alpha``."""
    return float(smallest_eigenvalues(montgomery_matrix(alpha, n, L), 1)[0])


def montgomery_ground(alpha: float = 0.0, n: int = M_DEFAULT_N,
                      L: float = M_DEFAULT_L) -> ModelGround:
    T = montgomery_matrix(alpha, n, L)
    lam = float(smallest_eigenvalues(T, 1)[0])
    return ModelGround(alpha, lam, eigenvector(T, lam), T)


@dataclass(frozen=True)
class MontgomeryConstants:
    Xi: float
    c0: float
    c0_perturbative: float
    argmin_alpha: float
    lambda2_inf: float
    n: int
    L: float
    scan_alpha: tuple = field(repr=False, default=())
    scan_lambda: tuple = field(repr=False, default=())


def _c0_raw(n, L, step):
    # the curve is even in alpha
    return 2.0 * (montgomery_curve(step, n, L) - montgomery_curve(0.0, n, L)) / step ** 2


def _c0_perturbative_raw(g: ModelGround) -> float:
    b = g.rho ** 3 / 3.0 * g.phi
    x = regularized_solve(g.T, g.value, g.phi, b)
    return 2.0 - 8.0 * float(np.sum(g.T.weight * b * x))


def montgomery_constants(n: int = M_DEFAULT_N, L: float = M_DEFAULT_L,
                         scan_step: float = 0.05) -> MontgomeryConstants:
    """Xi, the curvature c0 and a scan over alpha in [-2, 2] confirming the minimum at 0.

    c0 is a second difference with steps 2e-2 and 1e-2, Richardson-combined,
    evaluated on both grids and extrapolated again; ``c0_perturbative`` comes
    from the regularized resolvent.
    """
    g_c = montgomery_ground(0.0, n, L)
    g_f = montgomery_ground(0.0, 2 * n, L)
    xi_const = richardson(g_c.value, g_f.value)
    c0_grid = [richardson(_c0_raw(nn, L, 2e-2), _c0_raw(nn, L, 1e-2)) for nn in (n, 2 * n)]
    c0 = richardson(*c0_grid)
    c0_pt = richardson(_c0_perturbative_raw(g_c), _c0_perturbative_raw(g_f))

    count = int(round(4.0 / scan_step))
    alphas = -2.0 + scan_step * np.arange(count + 1)
    lam = []
    lam2 = []
    for a in alphas:
        two = smallest_eigenvalues(montgomery_matrix(float(a), n, L), 2)
        lam.append(float(two[0]))
        lam2.append(float(two[1]))
    lam = np.array(lam)
    base = g_c.value
    if np.any(lam < base - 1e-9):
        bad = alphas[np.argmin(lam)]
        raise NumericalError(f"Montgomery curve at alpha = {bad:.3g} lies below its value "
                             "at 0; the discretization is unreliable")
    return MontgomeryConstants(xi_const, c0, c0_pt, float(alphas[np.argmin(lam)]),
                               float(min(lam2)), int(n), float(L),
                               tuple(alphas.tolist()), tuple(lam.tolist()))


# ------------------------------------------------------------ both together

@dataclass(frozen=True)
class ModelConstants:
    theta0: float
    xi0: float
    phi0sq: float
    ddlambda_xi: float
    Xi: float
    c0: float
    grid_meta: dict = field(default_factory=dict, compare=False)

    @property
    def flux_threshold(self) -> float:
        """Theta0 / (xi0 phi0^2): ratio Phi / delta separating the two flux regimes."""
        return self.theta0 / (self.xi0 * self.phi0sq)


@lru_cache(maxsize=4)
def model_constants(dg_n: int = DG_DEFAULT_N, dg_L: float = DG_DEFAULT_L,
                    m_n: int = M_DEFAULT_N, m_L: float = M_DEFAULT_L) -> ModelConstants:
    """All constants, computed once per argument set and shared read-only."""
    dg = degennes_constants(dg_n, dg_L)
    mg = montgomery_constants(m_n, m_L)
    meta = {"degennes_n": dg_n, "degennes_L": dg_L, "montgomery_n": m_n,
            "montgomery_L": m_L, "extrapolation_order": 2,
            "c0_perturbative": mg.c0_perturbative, "montgomery_argmin": mg.argmin_alpha,
            "montgomery_lambda2_inf": mg.lambda2_inf}
    return ModelConstants(dg.theta0, dg.xi0, dg.phi0sq, dg.ddlambda_xi, mg.Xi, mg.c0, meta)
