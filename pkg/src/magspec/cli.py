"""Command line interface.

Every subcommand reads an optional ``key=value`` config file; command line
flags override it. Results go to CSV files in ``--out-dir``.

Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 insufficient
resolution.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import figure as figmod
from . import gl, models, scan
from .discretize import Domain, parse_domain
from .errors import ConfigError, MagspecError
from .field import RadialField, flux, parse_field

SUBCOMMANDS = ("constants", "scan", "annulus-limit", "oscillation", "asymptotic",
               "gl-set", "figure")
KEYS = ("field", "domain", "grid_n", "trunc_factor", "B", "sigma", "kappa", "model",
        "ro", "out_dir", "workers", "refine")
REQUIRED = {
    "constants": (),
    "figure": (),
    "scan": ("field", "domain", "B"),
    "annulus-limit": ("field", "domain", "B"),
    "oscillation": ("field", "domain", "B"),
    "asymptotic": ("field", "domain", "B", "model"),
    "gl-set": ("field", "domain", "kappa", "sigma"),
}
SCAN_COLUMNS = ("B", "lambda1", "m_star", "window_lo", "window_hi", "localization_metric")


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    field: Optional[RadialField] = None
    domain: Optional[Domain] = None
    grid_n: Optional[int] = None
    trunc_factor: float = 12.0
    B: Optional[tuple] = None
    sigma: Optional[tuple] = None
    kappa: Optional[float] = None
    model: Optional[str] = None
    ro: Optional[tuple] = None
    out_dir: Path = Path(".")
    workers: int = 1
    refine: bool = False


def parse_range(text: str, where: str = "") -> tuple:
    """``lo:hi:step`` (inclusive, points ``lo + i step``) or a single number."""
    prefix = f"{where}: " if where else ""
    parts = [p.strip() for p in text.split(":")]
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{prefix}malformed number in range {text!r}") from None
    if not all(math.isfinite(x) for x in nums):
        raise ConfigError(f"{prefix}range values must be finite")
    if len(nums) == 1:
        return (nums[0],)
    if len(nums) != 3:
        raise ConfigError(f"{prefix}range must be <number> or <lo>:<hi>:<step>, got {text!r}")
    lo, hi, step = nums
    if step <= 0 or hi < lo:
        raise ConfigError(f"{prefix}inconsistent range {text!r}: need step > 0 and hi >= lo")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return tuple((lo + step * np.arange(count)).tolist())


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        yield lineno, key.strip(), value.strip()


def _convert(key: str, value: str, where: str):
    try:
        if key == "field":
            return parse_field(value)
        if key in ("domain", "out_dir", "model"):
            return value
        if key in ("grid_n", "workers"):
            num = int(value)
            if num < 1:
                raise ConfigError(f"{where}: {key} must be >= 1")
            return num
        if key in ("trunc_factor", "kappa"):
            num = float(value)
            if not math.isfinite(num):
                raise ValueError
            return num
        if key in ("B", "sigma"):
            return parse_range(value, where)
        if key == "ro":
            return tuple(float(v) for v in value.split(","))
        if key == "refine":
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{where}: refine must be true or false")
            return low in ("true", "1", "yes")
    except ConfigError as exc:
        if str(exc).startswith(where):
            raise
        raise ConfigError(f"{where}: {exc}") from None
    except ValueError:
        raise ConfigError(f"{where}: malformed value {value!r}") from None
    raise ConfigError(f"{where}: unknown key {key!r}")


def parse_config(text: str, subcommand: str = "scan", overrides: Optional[dict] = None) -> RunConfig:
    """Validate ``key=value`` lines plus ``overrides`` (already strings) into a RunConfig."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    raw = {}
    for lineno, key, value in _lines(text):
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = (value, f"line {lineno}")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = (str(value), f"--{key.replace('_', '-')}")
    vals = {k: _convert(k, v, where) for k, (v, where) in raw.items()}
    trunc = vals.get("trunc_factor", 12.0)
    if "domain" in vals:
        try:
            vals["domain"] = parse_domain(vals["domain"], truncation_width_factor=trunc)
        except ConfigError as exc:
            raise ConfigError(f"{raw['domain'][1]}: domain: {exc}") from None
    missing = [k for k in REQUIRED[subcommand] if k not in raw]
    if missing:
        raise ConfigError(f"{subcommand}: missing required keys: {', '.join(missing)}")
    if "out_dir" in vals:
        vals["out_dir"] = Path(vals["out_dir"])
    if vals.get("kappa") is not None and vals["kappa"] <= 0:
        raise ConfigError(f"{raw['kappa'][1]}: kappa must be positive")
    if "B" in vals and min(vals["B"]) < 0:
        raise ConfigError(f"{raw['B'][1]}: B must be >= 0")
    if "sigma" in vals and min(vals["sigma"]) < 0:
        raise ConfigError(f"{raw['sigma'][1]}: sigma must be >= 0")
    if "model" in vals and vals["model"] not in scan.MODELS:
        raise ConfigError(f"{raw['model'][1]}: model must be one of {', '.join(scan.MODELS)}")
    if subcommand == "annulus-limit":
        dom = vals["domain"]
        if dom.kind != "annulus":
            raise ConfigError(f"{raw['domain'][1]}: annulus-limit needs an annulus domain")
        for ro in vals.get("ro", ()):
            if not ro > dom.ri:
                raise ConfigError(f"{raw['ro'][1]}: every Ro must exceed Ri = {dom.ri}")
    return RunConfig(subcommand=subcommand, **vals)


# ------------------------------------------------------------------ output

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".12g")
    return str(v)


def emit_csv(rows, header, path) -> Path:
    """Header plus rows, numbers at 12 significant digits, LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
    return path


def emit_report(report: dict, path) -> Path:
    return emit_csv(list(report.items()), ("key", "value"), path)


def scan_rows(table: scan.SweepTable):
    for p in table.points:
        yield (p.B, p.lambda1, p.m_star, p.window[0], p.window[1], p.localization_metric)


# ------------------------------------------------------------------ commands

def _sweep(cfg: RunConfig) -> scan.SweepTable:
    return scan.sweep(cfg.field, cfg.domain, cfg.B, n=cfg.grid_n, workers=cfg.workers,
                      refine=cfg.refine)


def cmd_constants(cfg: RunConfig):
    c = models.model_constants()
    report = {"Theta0": c.theta0, "xi0": c.xi0, "phi0_sq": c.phi0sq,
              "d2lambda_dxi2": c.ddlambda_xi, "Xi": c.Xi, "c0": c.c0,
              "flux_threshold": c.flux_threshold}
    report.update(c.grid_meta)
    return [emit_report(report, cfg.out_dir / "constants.csv")]


def cmd_scan(cfg: RunConfig):
    table = _sweep(cfg)
    return [emit_csv(scan_rows(table), SCAN_COLUMNS, cfg.out_dir / "scan.csv")]


def cmd_annulus_limit(cfg: RunConfig):
    dom = cfg.domain
    ros = cfg.ro or (dom.ro,)
    rows = []
    for B in cfg.B:
        limit, _ = scan.limit_operator_lambda(dom.ri, B)
        for ro in ros:
            sub = dataclasses.replace(dom, ro=ro)
            lam = scan.ground_state(cfg.field, sub, B, cfg.grid_n).lambda1
            rows.append((B, dom.ri, ro, lam, limit, abs(lam - limit)))
    return [emit_csv(rows, ("B", "ri", "ro", "lambda1", "limit_lambda1", "error"),
                     cfg.out_dir / "annulus_limit.csv")]


def cmd_oscillation(cfg: RunConfig):
    table = _sweep(cfg)
    breaks = scan.monotonicity_breaks(table)
    c = models.model_constants()
    phi = flux(cfg.field)
    report = {"points": len(table), "breaks": len(breaks), "flux": phi,
              "expected_period": 1.0 / phi if phi > 0 else math.inf}
    if cfg.field.delta > 0:
        report["flux_threshold_ratio"] = c.flux_threshold
        report["oscillation_condition"] = phi > c.flux_threshold * cfg.field.delta
    try:
        report["period"] = scan.oscillation_period(table)
    except MagspecError as exc:
        report["period"] = math.nan
        report["period_note"] = str(exc)
    return [emit_csv(scan_rows(table), SCAN_COLUMNS, cfg.out_dir / "scan.csv"),
            emit_csv(breaks, ("B1", "B2"), cfg.out_dir / "breaks.csv"),
            emit_report(report, cfg.out_dir / "oscillation.csv")]


def cmd_asymptotic(cfg: RunConfig):
    table = _sweep(cfg)
    fit = scan.asymptotic_fit(table, cfg.model)
    rows = zip(fit.B, table.lambda1, fit.leading, fit.residual)
    return [emit_csv(scan_rows(table), SCAN_COLUMNS, cfg.out_dir / "scan.csv"),
            emit_csv(rows, ("B", "lambda1", "leading", "residual"),
                     cfg.out_dir / "asymptotic_residual.csv"),
            emit_report(fit.report(), cfg.out_dir / "asymptotic_fit.csv")]


def cmd_gl_set(cfg: RunConfig):
    v = gl.n_set(cfg.field, cfg.domain, cfg.kappa, cfg.sigma, n=cfg.grid_n,
                 workers=cfg.workers)
    ksq = cfg.kappa ** 2
    rows = ((s, cfg.kappa * s, lam, ksq, f)
            for s, lam, f in zip(v.sigma_grid, v.lambda1, v.superconducting))
    comps = ((a, b, cfg.kappa * a, cfg.kappa * b) for a, b in v.components)
    print(f"{gl.LABEL}: {len(v.components)} component(s)")
    for a, b in v.components:
        print(f"  sigma in [{_cell(a)}, {_cell(b)}]")
    return [emit_csv(rows, ("sigma", "B", "lambda1", "kappa_sq", "superconducting"),
                     cfg.out_dir / "gl_set.csv"),
            emit_csv(comps, ("sigma_start", "sigma_end", "B_start", "B_end"),
                     cfg.out_dir / "gl_components.csv")]


def cmd_figure(cfg: RunConfig):
    left, right = figmod.figure_tables(n=cfg.grid_n or figmod.RIGHT_N)
    out = cfg.out_dir / "figure.svg"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(figmod.emit_figure((left, right)).encode("utf-8"))
    paths = [out]
    for name, tab in (("figure_left.csv", left), ("figure_right.csv", right)):
        header = ("B",) + tuple(f"m{m}" for m in figmod.M_VALUES) + ("envelope",)
        rows = ((b,) + tuple(c[i] for c in tab.curves) + (tab.envelope[i],)
                for i, b in enumerate(tab.B))
        paths.append(emit_csv(rows, header, cfg.out_dir / name))
    return paths


COMMANDS = {"constants": cmd_constants, "scan": cmd_scan,
            "annulus-limit": cmd_annulus_limit, "oscillation": cmd_oscillation,
            "asymptotic": cmd_asymptotic, "gl-set": cmd_gl_set, "figure": cmd_figure}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="magspec", description="Ground-state energies of radial "
                     "magnetic Schroedinger operators.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="key=value file; flags override it")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--workers")
        p.add_argument("--grid-n", dest="grid_n")
        if name in ("constants", "figure"):
            continue
        p.add_argument("--field", help="constant:<level>, parabolic:<delta> or custom:<path>")
        p.add_argument("--domain", help="annulus:<Ri>:<Ro>, disc, exterior or plane")
        p.add_argument("--trunc-factor", dest="trunc_factor")
        p.add_argument("--refine", choices=("true", "false"))
        if name == "gl-set":
            p.add_argument("--kappa")
            p.add_argument("--sigma", help="<lo>:<hi>:<step>")
            p.add_argument("--sigma-min", dest="sigma_min", type=float)
            p.add_argument("--sigma-max", dest="sigma_max", type=float)
            p.add_argument("--sigma-step", dest="sigma_step", type=float)
        else:
            p.add_argument("--B", "-B", dest="B", help="<value> or <lo>:<hi>:<step>")
        if name == "asymptotic":
            p.add_argument("--model", choices=scan.MODELS)
        if name == "annulus-limit":
            p.add_argument("--ro", help="comma-separated outer radii")
    return parser


def config_from_args(args) -> RunConfig:
    text = ""
    if args.config is not None:
        try:
            text = args.config.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    overrides = {k: getattr(args, k, None) for k in KEYS}
    parts = [getattr(args, f"sigma_{s}", None) for s in ("min", "max", "step")]
    if any(p is not None for p in parts):
        if not all(p is not None for p in parts):
            raise ConfigError("--sigma-min, --sigma-max and --sigma-step go together")
        overrides["sigma"] = ":".join(repr(p) for p in parts)
    return parse_config(text, args.subcommand, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        paths = COMMANDS[cfg.subcommand](cfg)
    except MagspecError as exc:
        print(f"magspec: error: {exc}", file=sys.stderr)
        return exc.exit_code
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
