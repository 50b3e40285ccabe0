"""Radial magnetic field profiles, their flux potential and local data at r = 1.

A profile is described by :class:`RadialField`. The azimuthal gauge is used
throughout, so everything is expressed through the enclosed flux

    F(r) = r a(r) = int_0^r beta(s) s ds,

with ``a(r)`` the flux potential and ``Phi = F(1)`` the flux through the unit
disc (divided by 2 pi).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import integrate, interpolate

from .errors import ConfigError, DomainError

# Gauss-Legendre rule used for cumulative flux integrals of custom profiles.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)

RAR_WINDOW = 0.2


@dataclass(frozen=True)
class RadialField:
    """A non-negative radial field ``beta(x) = beta_tilde(|x|)``.

    ``delta, k, c, d`` are the values of ``beta_tilde`` and its 2nd, 3rd and
    4th derivatives at r = 1. The first derivative there is zero by
    assumption. Use :func:`Constant`, :func:`ParabolicWell` or :func:`Custom`
    rather than calling the constructor directly.
    """

    kind: str
    delta: float
    k: float = 0.0
    c: float = 0.0
    d: float = 0.0
    level: float = 0.0
    profile: Optional[Callable] = dc_field(default=None, compare=False, repr=False)
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("constant", "parabolic", "custom"):
            raise ConfigError(f"unknown field kind {self.kind!r}")
        if self.delta < 0:
            raise ConfigError(f"delta must be non-negative, got {self.delta}")
        if self.kind == "custom" and self.profile is None:
            raise ConfigError("custom field needs a profile callable")

    def __str__(self):
        if self.label:
            return self.label
        if self.kind == "constant":
            return f"constant:{self.level:g}"
        if self.kind == "parabolic":
            return f"parabolic:{self.delta:g}"
        return "custom"


def Constant(level: float) -> RadialField:
    """Uniform field of strength ``level``."""
    level = float(level)
    if level < 0:
        raise ConfigError(f"constant field level must be >= 0, got {level}")
    return RadialField("constant", delta=level, level=level)


def ParabolicWell(delta: float) -> RadialField:
    """``beta_tilde(r) = delta + (1 - r)^2``; its flux is ``delta/2 + 1/12``."""
    delta = float(delta)
    if delta < 0:
        raise ConfigError(f"parabolic well needs delta >= 0, got {delta}")
    return RadialField("parabolic", delta=delta, k=2.0)


def Custom(profile: Callable, delta: float, k: float, c: float = 0.0, d: float = 0.0,
           label: str = "", check: bool = True) -> RadialField:
    """User-supplied profile; the local data at r = 1 must be given explicitly.

    ``profile`` must accept numpy arrays. With ``check`` the value at r = 1 and
    the vanishing of the first derivative there are verified.
    """
    fld = RadialField("custom", delta=float(delta), k=float(k), c=float(c), d=float(d),
                      profile=profile, label=label)
    if check:
        at_one = float(profile(np.array([1.0]))[0])
        if abs(at_one - fld.delta) > 1e-8 * max(1.0, abs(at_one)):
            raise ConfigError(f"profile(1) = {at_one} disagrees with delta = {fld.delta}")
        step = 1e-5
        slope = float((profile(np.array([1.0 + step]))[0]
                       - profile(np.array([1.0 - step]))[0]) / (2 * step))
        if abs(slope) > 1e-8 * max(1.0, abs(at_one)) + 1e-8:
            raise ConfigError(f"beta'(1) must vanish, central difference gives {slope:.3e}")
    return fld


def eval_beta(fld: RadialField, r):
    """Field strength ``beta_tilde(r)``; accepts scalars or arrays."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise DomainError("beta_tilde is defined for r >= 0 only")
    if fld.kind == "constant":
        out = np.full_like(arr, fld.level)
    elif fld.kind == "parabolic":
        out = fld.delta + (1.0 - arr) ** 2
    else:
        out = np.asarray(fld.profile(np.atleast_1d(arr)), dtype=float).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def _quad_flux(fld: RadialField, r: float) -> float:
    val, _ = integrate.quad(lambda s: float(fld.profile(np.array([s]))[0]) * s, 0.0, r,
                            epsabs=1e-13, epsrel=1e-13, limit=400)
    return val


def enclosed_flux(fld: RadialField, r):
    """``F(r) = r a(r) = int_0^r beta_tilde(s) s ds`` for scalar or array ``r``.

    Closed forms are used for the built-in kinds. For custom profiles the first
    point is integrated adaptively and the rest cumulatively with an 8-point
    Gauss-Legendre rule per sub-interval, so ``r`` should be sorted and fine.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise DomainError("enclosed flux needs r >= 0")
    if fld.kind == "constant":
        out = 0.5 * fld.level * arr ** 2
    elif fld.kind == "parabolic":
        out = (0.5 * (fld.delta + 1.0) * arr ** 2 - (2.0 / 3.0) * arr ** 3 + 0.25 * arr ** 4)
    elif arr.ndim == 0:
        out = np.asarray(_quad_flux(fld, float(arr)))
    else:
        flat = arr.ravel()
        order = np.argsort(flat, kind="stable")
        srt = flat[order]
        lo, hi = srt[:-1], srt[1:]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        s = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        vals = np.asarray(fld.profile(s.ravel()), dtype=float).reshape(s.shape) * s
        pieces = half * (vals @ _GL_WEIGHTS)
        cum = np.empty_like(srt)
        cum[0] = _quad_flux(fld, srt[0]) if srt.size else 0.0
        cum[1:] = cum[0] + np.cumsum(pieces)
        out = np.empty_like(flat)
        out[order] = cum
        out = out.reshape(arr.shape)
    return float(out) if np.ndim(out) == 0 else out


def flux_potential(fld: RadialField, r: float) -> float:
    """``a(r) = F(r) / r``."""
    if r <= 0:
        raise DomainError(f"flux potential needs r > 0, got {r}")
    return enclosed_flux(fld, float(r)) / r


def flux(fld: RadialField) -> float:
    """Flux through the unit disc, ``Phi = a(1)``."""
    return flux_potential(fld, 1.0)


def rar_expansion(fld: RadialField, r):
    """Fourth-order Taylor polynomial of ``r a(r)`` around r = 1."""
    t = np.asarray(r, dtype=float) - 1.0
    phi = flux(fld)
    return (phi + fld.delta * t + 0.5 * fld.delta * t ** 2 + fld.k / 6.0 * t ** 3
            + (fld.c / 24.0 + fld.k / 8.0) * t ** 4)


def rar_expansion_check(fld: RadialField, r: float) -> float:
    """Absolute difference between ``r a(r)`` and its quartic expansion at r = 1."""
    if abs(r - 1.0) > RAR_WINDOW + 1e-15:
        raise DomainError(f"|r - 1| must be <= {RAR_WINDOW}, got r = {r}")
    return abs(enclosed_flux(fld, float(r)) - float(rar_expansion(fld, r)))


def check_assumptions(fld: RadialField, domain_kind: str, r_samples, theta0: float):
    """Sample the standing hypotheses on the working grid; warn on violation.

    Returns the list of messages that were issued.
    """
    r_samples = np.asarray(r_samples, dtype=float)
    beta = np.atleast_1d(eval_beta(fld, r_samples))
    msgs = []
    if np.any(beta < 0):
        raise ConfigError("field profile is negative on the working grid")
    if domain_kind in ("disc", "exterior"):
        if not theta0 * fld.delta < beta.min() + 1e-15 and fld.delta > 0:
            msgs.append(f"Theta0*delta = {theta0 * fld.delta:.4g} is not below "
                        f"inf beta = {beta.min():.4g}")
    elif domain_kind == "plane":
        away = np.abs(r_samples - 1.0) > 0.25
        if fld.k <= 0:
            msgs.append("plane requires a non-degenerate minimum at r = 1 (k > 0)")
        if np.any(away) and beta[away].min() <= fld.delta:
            msgs.append("plane requires beta > delta away from the unit circle")
    for msg in msgs:
        warnings.warn(msg, stacklevel=3)
    return msgs


def load_profile(path) -> RadialField:
    """Read a sampled profile file.

    The first line carries ``delta=.. k=.. c=.. d=..`` (optionally after ``#``);
    the remaining lines are two whitespace- or comma-separated columns
    ``r beta(r)`` starting at r = 0. A cubic spline interpolates the samples.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read profile file {path}: {exc}") from exc
    if not lines:
        raise ConfigError(f"profile file {path} is empty")
    header = lines[0].lstrip("#").replace(",", " ").split()
    meta = {}
    for tok in header:
        if "=" not in tok:
            raise ConfigError(f"{path}:1: expected key=value, got {tok!r}")
        key, val = tok.split("=", 1)
        try:
            meta[key.strip()] = float(val)
        except ValueError:
            raise ConfigError(f"{path}:1: malformed number {val!r}") from None
    missing = {"delta", "k"} - meta.keys()
    if missing:
        raise ConfigError(f"{path}:1: header lacks {sorted(missing)}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except (ValueError, IndexError):
            raise ConfigError(f"{path}:{lineno}: expected two numbers") from None
    data = np.array(rows)
    if len(data) < 4 or data[0, 0] != 0.0 or np.any(np.diff(data[:, 0]) <= 0):
        raise ConfigError(f"{path}: need >= 4 strictly increasing samples starting at r = 0")
    spline = interpolate.CubicSpline(data[:, 0], data[:, 1])
    return Custom(spline, meta["delta"], meta["k"], meta.get("c", 0.0), meta.get("d", 0.0),
                  label=f"custom:{path}")


def parse_field(text: str) -> RadialField:
    """Parse ``constant:<level>``, ``parabolic:<delta>`` or ``custom:<path>``."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "custom":
        if not arg:
            raise ConfigError("custom field needs a path: custom:<path>")
        return load_profile(arg)
    if kind not in ("constant", "parabolic"):
        raise ConfigError(f"unknown field kind {kind!r}")
    try:
        value = float(arg)
    except ValueError:
        raise ConfigError(f"malformed field parameter {arg!r}") from None
    if not math.isfinite(value):
        raise ConfigError("field parameter must be finite")
    return Constant(value) if kind == "constant" else ParabolicWell(value)
