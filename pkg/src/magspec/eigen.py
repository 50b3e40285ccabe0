"""Lowest eigenpairs of symmetric tridiagonal matrices.

Eigenvalues come from Sturm-sequence bisection started from the Gershgorin
interval, eigenvectors from inverse iteration on a partially pivoted LU
factorization. Vectors are returned as nodal values normalized in the weighted
inner product ``<u, v>_w = sum w_i u_i v_i`` carried by the matrix, so that a
discretized function has unit L^2(I, r dr) norm.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .discretize import SymmetricTridiagonal
from .errors import DomainError, NumericalError

_EPS = np.finfo(float).eps
MAX_INVERSE_ITERATIONS = 50


@njit(cache=True)
def _sturm_count(d, e2, x, pivmin):
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, d.size):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _bisect_lowest(d, e2, k, lo, hi, pivmin, abstol, out):
    eps = np.finfo(np.float64).eps
    for j in range(k):
        a, b = lo, hi
        for _ in range(2000):
            mid = 0.5 * (a + b)
            width = b - a
            if width <= abstol or width <= 2.0 * eps * max(abs(a), abs(b)) or mid <= a or mid >= b:
                break
            if _sturm_count(d, e2, mid, pivmin) >= j + 1:
                b = mid
            else:
                a = mid
        out[j] = 0.5 * (a + b)
        # the next eigenvalue is >= this one; a stays a valid lower bracket
        lo = a


def sturm_count(T: SymmetricTridiagonal, x: float) -> int:
    """Number of eigenvalues of ``T`` strictly below ``x``."""
    e2 = T.offdiag ** 2
    return int(_sturm_count(T.diag, e2, float(x), _pivmin(e2)))


def _pivmin(e2):
    return np.finfo(float).tiny * max(1.0, float(e2.max()) if e2.size else 1.0)


def gershgorin(T: SymmetricTridiagonal):
    rad = np.zeros(T.n)
    rad[:-1] += np.abs(T.offdiag)
    rad[1:] += np.abs(T.offdiag)
    return float((T.diag - rad).min()), float((T.diag + rad).max())


def smallest_eigenvalues(T: SymmetricTridiagonal, count: int = 1, tol: float = 0.0) -> np.ndarray:
    """The ``count`` smallest eigenvalues in ascending order.

    Bisection runs until the bracket is below ``tol`` or reaches machine
    precision, whichever is first; the default resolves to machine precision,
    well inside ``1e-12 * max(1, ||T||_inf)``.
    """
    if count < 1 or count > T.n:
        raise DomainError(f"requested {count} eigenvalues of a {T.n}x{T.n} matrix")
    lo, hi = gershgorin(T)
    if T.floor is not None:
        lo = max(lo, T.floor)
    span = max(hi - lo, 1.0)
    lo -= 2 * _EPS * span
    hi += 2 * _EPS * span
    e2 = np.ascontiguousarray(T.offdiag ** 2)
    out = np.empty(count)
    _bisect_lowest(T.diag, e2, count, lo, hi, _pivmin(e2), float(tol), out)
    return out


@njit(cache=True)
def _gttrf(dl, d, du, small):
    """LU factorization with partial pivoting of a tridiagonal matrix (LAPACK dgttrf)."""
    n = d.size
    du2 = np.zeros(max(n - 2, 0))
    ipiv = np.zeros(n, np.int64)
    for i in range(n - 1):
        if abs(d[i]) >= abs(dl[i]):
            if d[i] != 0.0:
                fact = dl[i] / d[i]
                dl[i] = fact
                d[i + 1] -= fact * du[i]
        else:
            fact = d[i] / dl[i]
            d[i] = dl[i]
            dl[i] = fact
            temp = du[i]
            du[i] = d[i + 1]
            d[i + 1] = temp - fact * d[i + 1]
            if i < n - 2:
                du2[i] = du[i + 1]
                du[i + 1] = -fact * du[i + 1]
            ipiv[i] = 1
    for i in range(n):
        if abs(d[i]) < small:
            d[i] = small if d[i] >= 0.0 else -small
    return du2, ipiv


@njit(cache=True)
def _gttrs(dl, d, du, du2, ipiv, b):
    n = d.size
    for i in range(n - 1):
        if ipiv[i] == 0:
            b[i + 1] -= dl[i] * b[i]
        else:
            temp = b[i]
            b[i] = b[i + 1]
            b[i + 1] = temp - dl[i] * b[i]
    b[n - 1] /= d[n - 1]
    if n > 1:
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2]
    for i in range(n - 3, -1, -1):
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i]


class _ShiftedLU:
    """Factorization of ``T - shift I`` reused across solves."""

    def __init__(self, T: SymmetricTridiagonal, shift: float):
        self.dl = T.offdiag.copy()
        self.du = T.offdiag.copy()
        self.d = T.diag - shift
        small = _EPS * max(T.norm_inf, 1.0)
        self.du2, self.ipiv = _gttrf(self.dl, self.d, self.du, small)

    def solve(self, b):
        x = np.array(b, dtype=float, copy=True)
        _gttrs(self.dl, self.d, self.du, self.du2, self.ipiv, x)
        return x


def solve_shifted(T: SymmetricTridiagonal, shift: float, b) -> np.ndarray:
    """Solve ``(T - shift I) x = b`` in the symmetric coordinates."""
    return _ShiftedLU(T, shift).solve(b)


@dataclass(frozen=True, eq=False)
class EigenPair:
    """``vector`` holds nodal values with unit weighted norm.

    ``residual_norm`` is ``||(T - value) v||`` for the symmetric-coordinate
    vector ``v = sqrt(w) * vector``.
    """

    value: float
    vector: np.ndarray
    residual_norm: float

    def symmetric(self, T: SymmetricTridiagonal) -> np.ndarray:
        return np.sqrt(T.weight) * self.vector


def _start_vector(n):
    # deterministic, with components along every eigenvector
    i = np.arange(n)
    return 1.0 + 0.1 * np.sin(1.7 * i + 0.3)


def eigenvector(T: SymmetricTridiagonal, value: float) -> EigenPair:
    """Inverse iteration at ``value``, which must be within ~1e-8 of an eigenvalue.

    Near-degenerate shifts are retried with a perturbed shift. The sign is fixed
    so that the entry of largest magnitude is positive.
    """
    norm = max(T.norm_inf, 1.0)
    target = 1e-10 * norm
    far = 1e-6 * max(1.0, abs(value)) + 1e-10 * norm
    last = np.inf
    for attempt in range(3):
        shift = value - attempt * 1e-9 * max(1.0, abs(value))
        lu = _ShiftedLU(T, shift)
        v = _start_vector(T.n)
        v /= np.linalg.norm(v)
        for _ in range(MAX_INVERSE_ITERATIONS):
            y = lu.solve(v)
            ny = np.linalg.norm(y)
            if not np.isfinite(ny) or ny == 0.0:
                break
            v = y / ny
            Tv = T.matvec(v)
            rq = float(v @ Tv)
            last = float(np.linalg.norm(Tv - rq * v))
            if last <= target:
                break
        if last <= target:
            if abs(rq - value) > far:
                raise NumericalError(f"{value!r} is not an eigenvalue: nearest Rayleigh "
                                     f"quotient is {rq!r}", residual=abs(rq - value))
            lam = value if abs(rq - value) <= target else rq
            res = float(np.linalg.norm(Tv - lam * v))
            if v[np.argmax(np.abs(v))] < 0:
                v = -v
            return EigenPair(lam, v / np.sqrt(T.weight), res)
    raise NumericalError(f"inverse iteration at {value!r} did not converge "
                         f"(residual {last:.3e})", residual=last)


def lowest_pair(T: SymmetricTridiagonal) -> EigenPair:
    """Ground eigenpair, eigenvalue from bisection and vector from inverse iteration."""
    lam = smallest_eigenvalues(T, 1)[0]
    return eigenvector(T, lam)


def weighted_dot(T: SymmetricTridiagonal, u, v) -> float:
    return float(np.sum(T.weight * u * v))


def regularized_solve(T: SymmetricTridiagonal, value: float, ground, b) -> np.ndarray:
    """Regularized resolvent: ``x`` orthogonal to ``ground`` with ``(H - value) x = P b``.

    ``H`` is the operator on nodal functions and ``P`` the weighted orthogonal
    projection off ``ground``. The shifted system is solved once with a tiny
    shift below ``value`` and then corrected by one refinement step; both
    solutions are projected off the ground state.
    """
    sw = np.sqrt(T.weight)
    g = sw * np.asarray(ground, dtype=float)
    gn = np.linalg.norm(g)
    if gn == 0:
        raise DomainError("ground state vector is zero")
    g = g / gn
    norm = max(T.norm_inf, 1.0)
    resid_g = np.linalg.norm(T.matvec(g) - value * g)
    if resid_g > 1e-8 * norm:
        raise NumericalError(f"{value!r} is not an eigenvalue with the given ground state "
                             f"(residual {resid_g:.3e})", residual=resid_g)
    rhs = sw * np.asarray(b, dtype=float)
    rhs = rhs - (g @ rhs) * g
    eta = 1e-10 * max(1.0, abs(value))
    lu = _ShiftedLU(T, value - eta)
    x = lu.solve(rhs)
    x -= (g @ x) * g
    for _ in range(2):
        r = rhs - (T.matvec(x) - value * x)
        r -= (g @ r) * g
        dx = lu.solve(r)
        dx -= (g @ dx) * g
        x += dx
    r = rhs - (T.matvec(x) - value * x)
    r -= (g @ r) * g
    scale = max(np.linalg.norm(rhs), 1.0)
    if np.linalg.norm(r) > 1e-9 * scale * max(1.0, norm * 1e-6):
        raise NumericalError(f"regularized solve did not converge (residual "
                             f"{np.linalg.norm(r):.3e})", residual=float(np.linalg.norm(r)))
    return x / sw
