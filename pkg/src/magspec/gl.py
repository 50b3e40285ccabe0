"""Linear-criterion superconductivity set.

A field strength ``sigma`` counts as superconducting for the parameter
``kappa`` when the magnetic ground energy at ``B = kappa sigma`` lies strictly
below ``kappa^2``. This linear test stands in for the existence of a
nontrivial Ginzburg-Landau minimizer; outputs are labelled accordingly.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import field as fieldmod
from .discretize import Domain
from .errors import DomainError
from .scan import SweepTable, ground_state, sweep

LABEL = "linear-criterion N(kappa)"


@dataclass(frozen=True)
class GLVerdict:
    kappa: float
    sigma_grid: tuple
    superconducting: tuple
    components: tuple
    lambda1: tuple = ()

    def __post_init__(self):
        if len(self.sigma_grid) != len(self.superconducting):
            raise DomainError("sigma grid and verdicts differ in length")
        if self.lambda1 and len(self.lambda1) != len(self.sigma_grid):
            raise DomainError("sigma grid and eigenvalues differ in length")

    @property
    def B(self) -> np.ndarray:
        return self.kappa * np.asarray(self.sigma_grid)


def classify(lambda1: float, kappa: float) -> bool:
    """Strict test ``lambda1 < kappa^2``; equality counts as normal."""
    return bool(lambda1 < kappa * kappa)


def components(sigma_grid: Sequence[float], flags: Sequence[bool]) -> tuple:
    """Maximal runs of ``True`` as ``(sigma_start, sigma_end)`` pairs."""
    out = []
    start = None
    for s, f in zip(sigma_grid, flags):
        if f and start is None:
            start = s
        if not f and start is not None:
            out.append((float(start), float(prev)))
            start = None
        prev = s
    if start is not None:
        out.append((float(start), float(prev)))
    return tuple(out)


def flags_from_components(sigma_grid: Sequence[float], comps) -> tuple:
    """Inverse of :func:`components` on the same grid."""
    return tuple(any(a <= s <= b for a, b in comps) for s in sigma_grid)


def _check_kappa(kappa):
    if not (kappa > 0 and math.isfinite(kappa)):
        raise DomainError(f"kappa must be positive and finite, got {kappa}")


def is_superconducting(fld, domain: Domain, kappa: float, sigma: float,
                       n: Optional[int] = None) -> bool:
    _check_kappa(kappa)
    if sigma < 0:
        raise DomainError(f"sigma must be >= 0, got {sigma}")
    B = kappa * sigma
    lam = 0.0 if B == 0 else ground_state(fld, domain, B, n).lambda1
    return classify(lam, kappa)


def verdict_from_lambda(kappa: float, sigma_grid, lambda1) -> GLVerdict:
    """Classify cached ground energies without any new eigenvalue solve."""
    _check_kappa(kappa)
    flags = tuple(classify(lam, kappa) for lam in lambda1)
    sig = tuple(float(s) for s in sigma_grid)
    return GLVerdict(float(kappa), sig, flags, components(sig, flags),
                     tuple(float(x) for x in lambda1))


def verdict_from_table(table: SweepTable, kappa: float) -> GLVerdict:
    return verdict_from_lambda(kappa, table.B / kappa, table.lambda1)


def n_set(fld, domain: Domain, kappa: float, sigma_grid: Sequence[float],
          n: Optional[int] = None, workers: int = 1) -> GLVerdict:
    """Evaluate the criterion on ``sigma_grid`` and extract its components.

    Warns when the grid is coarser than ``1/(20 Phi kappa)``, a twentieth of
    the expected spacing of oscillations in sigma.
    """
    _check_kappa(kappa)
    sig = np.asarray(sigma_grid, dtype=float)
    if sig.size == 0:
        raise DomainError("empty sigma grid")
    if np.any(sig < 0) or np.any(np.diff(sig) <= 0):
        raise DomainError("sigma grid must be non-negative and strictly increasing")
    phi = (fieldmod.enclosed_flux(fld, domain.ri) if domain.kind == "annulus"
           else fieldmod.flux(fld))
    if sig.size > 1 and phi > 0 and np.max(np.diff(sig)) > (1 + 1e-9) / (20.0 * phi * kappa):
        warnings.warn("sigma step exceeds 1/(20 Phi kappa); oscillations may be missed",
                      stacklevel=2)
    lam = np.zeros(sig.size)
    positive = sig > 0
    if positive.any():
        table = sweep(fld, domain, kappa * sig[positive], n=n, workers=workers)
        lam[positive] = table.lambda1
    return verdict_from_lambda(kappa, sig, lam)


def band_kappa(table: SweepTable) -> float:
    """``kappa`` with ``kappa^2`` midway across the deepest local drop of ``lambda1``.

    The drop runs from a local maximum to the following local minimum; a
    threshold inside it is crossed at least three times along the table.
    """
    lam = table.lambda1
    best = None
    i = 0
    while i < len(lam) - 1:
        if lam[i + 1] < lam[i]:
            j = i
            while j < len(lam) - 1 and lam[j + 1] < lam[j]:
                j += 1
            drop = lam[i] - lam[j]
            if best is None or drop > best[0]:
                best = (drop, lam[i], lam[j])
            i = j
        else:
            i += 1
    if best is None:
        raise DomainError("lambda1 never decreases along the table; no oscillation band")
    return math.sqrt(0.5 * (best[1] + best[2]))


def multi_component_count(fld, domain: Domain, kappa: float,
                          B_range=(500.0, 560.0), step: float = 0.25,
                          table: Optional[SweepTable] = None, n: Optional[int] = None,
                          workers: int = 1) -> int:
    """Number of components of the criterion with ``kappa sigma`` in ``B_range``.

    The fields below the window are represented by sigma = 0 alone, where the
    verdict is always true, so a low-sigma component is counted once whether
    or not it reaches into the window. A precomputed ``table`` on that B range
    is reused when given.
    """
    _check_kappa(kappa)
    if table is None:
        lo, hi = B_range
        if not (0 <= lo < hi) or step <= 0:
            raise DomainError("need 0 <= B_min < B_max and step > 0")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        table = sweep(fld, domain, lo + step * np.arange(count), n=n, workers=workers)
    sigma = np.concatenate(([0.0], table.B / kappa))
    lam = np.concatenate(([0.0], table.lambda1))
    return len(verdict_from_lambda(kappa, sigma, lam).components)

