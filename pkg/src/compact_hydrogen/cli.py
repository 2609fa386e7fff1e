"""Command-line front end: radius sweeps and identity checks.

``compact-hydrogen sweep`` diagonalises the compactified Hamiltonian for a
list of radii and writes one row per radius as CSV or JSON.
``compact-hydrogen check`` runs the identity and property suites and exits
nonzero when any check fails.

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import potential as pot
from . import solver, variational

__all__ = [
    "CheckResult",
    "ConfigError",
    "SweepConfig",
    "SweepRow",
    "main",
    "render",
    "run_checks",
    "run_sweep",
    "sweep_point",
]

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3
CHECK_SUITES = ("identities", "hardy", "instability", "weyl")
UNITS_NOTE = "lengths in Bohr radii a0; energies in hbar^2/(2 m a0^2); Z = 4R"


class ConfigError(ValueError):
    """Invalid sweep or check configuration."""


@dataclass(frozen=True)
class SweepConfig:
    r_values: tuple[float, ...]
    grid: solver.GridSpec = field(default_factory=solver.GridSpec)
    l_max: int = 2
    checks: frozenset[str] = frozenset()
    output_path: str | None = None
    output_format: str = "csv"
    seed: int = 0
    workers: int = 1
    ladder_levels: int = 3
    tol_neg: float = solver.TOL_NEG

    def __post_init__(self):
        r = self.r_values
        if not r:
            raise ConfigError("r_values is empty")
        if any(not (v > 0 and math.isfinite(v)) for v in r):
            raise ConfigError("r_values must be positive and finite")
        if any(b <= a for a, b in zip(r, r[1:])):
            raise ConfigError("r_values must be strictly ascending")
        if self.l_max < 0:
            raise ConfigError("l_max must be non-negative")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.output_format!r}")
        unknown = set(self.checks) - set(CHECK_SUITES)
        if unknown:
            raise ConfigError(f"unknown check suites: {sorted(unknown)}")
        if self.workers < 1 or self.ladder_levels < 1:
            raise ConfigError("workers and ladder_levels must be at least 1")

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["r_values"] = list(self.r_values)
        d["checks"] = sorted(self.checks)
        return d


@dataclass(frozen=True)
class SweepRow:
    R: float
    Z: float
    ground_energy: float
    variational_bound: float
    n_bound_states: int
    stability_flag: str
    max_residual: float


def stability_flag(R: float) -> str:
    """Declared from Z = 4R, not inferred from the numerics."""
    Z = pot.charge_to_Z(R)
    return "stable" if Z < 1.0 else ("critical" if Z == 1.0 else "unstable")


def sweep_point(R: float, cfg: SweepConfig) -> tuple[SweepRow, dict]:
    """Solve one radius.  Solver failures are recorded in the row, not raised."""
    spec = pot.PotentialSpec.physical(R)
    flag = stability_flag(R)
    diag: dict = {}
    bound = variational.ground_state_bound(R).total
    try:
        A = solver.assemble_compactified(spec, 0, cfg.grid)
        res = solver.lowest_eigenvalues(A, 1, cfg.tol_neg)
        ground, residual = res.ground, float(res.residuals.max())
        diag["matrix_size"] = A.shape[0]
        diag["matrix_norm"] = A.norm
        if flag == "unstable":
            ladder = solver.refinement_ladder(cfg.grid.r_min, cfg.ladder_levels)
            energies = solver.instability_refinement(spec, ladder, cfg.grid)
            diag["ladder_r_min"] = ladder
            diag["ladder_ground"] = energies
            ground = energies[-1]
        n_bound = solver.count_bound_states(spec, cfg.l_max, cfg.grid, cfg.tol_neg)
    except solver.NonConvergenceError as exc:
        diag["error"] = str(exc)
        res_best = exc.residuals
        ground = float("nan")
        residual = float(np.max(res_best)) if res_best is not None else float("nan")
        n_bound = -1
    row = SweepRow(R, spec.Z, ground, bound, n_bound, flag, residual)
    return row, diag


def _point(args):
    return sweep_point(*args)


def _fmt(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def render(rows, diags, cfg: SweepConfig) -> str:
    """Serialise rows in the configured format."""
    names = [f.name for f in dataclasses.fields(SweepRow)]
    if cfg.output_format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names)
        for row in rows:
            w.writerow([_fmt(getattr(row, n)) for n in names])
        return buf.getvalue()
    doc = {
        "config": cfg.as_dict(),
        "units": UNITS_NOTE,
        "rows": [{**dataclasses.asdict(r), "diagnostics": d} for r, d in zip(rows, diags)],
    }
    return json.dumps(_json_safe(doc), indent=2) + "\n"


def _atomic_write(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".sweep-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_sweep(cfg: SweepConfig) -> tuple[list[SweepRow], list[dict]]:
    """Solve every radius, in order, and write the output file if configured.

    Rows come back ordered by R whatever the worker count.  An I/O failure
    propagates as ``OSError`` with the rows attached as ``exc.rows``.
    """
    tasks = [(R, cfg) for R in cfg.r_values]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(tasks))) as ex:
            out = list(ex.map(_point, tasks))
    else:
        out = [_point(t) for t in tasks]
    rows = [o[0] for o in out]
    diags = [o[1] for o in out]
    if cfg.output_path:
        try:
            _atomic_write(cfg.output_path, render(rows, diags, cfg))
        except OSError as exc:
            exc.rows = rows
            raise
    return rows, diags


# ---------------------------------------------------------------------------
# checks


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    achieved: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} {self.suite}/{self.name}: achieved {self.achieved:.6g} (tolerance {self.tolerance:.3g})"


def _identities(rng) -> list[CheckResult]:
    out = []
    worst = 0.0
    worst_tail = 0.0
    for R in (0.05, 0.25, 1.0):
        spec = pot.PotentialSpec(R=R, Z=1.0, n_images=10_000)
        for _ in range(100):
            r = 10.0 ** rng.uniform(-3, 2)
            p = pot.SpacePoint(r, rng.uniform(-math.pi * R, math.pi * R))
            exact = pot.closed_form(p, spec)
            value, tail = pot.image_sum(p, spec)
            worst = max(worst, abs(value - exact) / (tail + 4 * pot._EPS * abs(exact)))
            worst_tail = max(worst_tail, tail)
    out.append(CheckResult("identities", "image sum error / tail bound", worst, 1.0, worst <= 1.0))
    out.append(CheckResult("identities", "tail bound", worst_tail, 1e-7, worst_tail <= 1e-7))
    spec = pot.PotentialSpec(R=1.0, Z=1.0)
    dev = max(abs(pot.axial_integral(r, spec)[0] * r / math.pi + 1) for r in (1e-2, 1e-1, 1.0, 10.0, 1e2))
    out.append(CheckResult("identities", "axial integral r/pi + 1", dev, 1e-8, dev <= 1e-8))
    lim = pot.closed_form(pot.SpacePoint(1e-6, math.pi), spec)
    out.append(CheckResult("identities", "V(0+, pi R) + 1/(4R^2)", abs(lim + 0.25), 1e-6, abs(lim + 0.25) <= 1e-6))
    return out


def _hardy() -> list[CheckResult]:
    q = variational.hardy_quotient(variational.gaussian_trial(4), 4)
    out = [CheckResult("hardy", "gaussian quotient - 2", abs(q - 2), 1e-6, abs(q - 2) <= 1e-6)]
    for n in (8, 64):
        g = variational.hardy_quotient(variational.optimizing_sequence(variational.OptimizingSequenceSpec(n))) - 1
        out.append(CheckResult("hardy", f"optimizing sequence gap n={n}", g, 0.15 * 64 / n, 0 <= g <= 0.15 * 64 / n))
    return out


def _instability(verbose) -> list[CheckResult]:
    prev = math.inf
    decreasing = True
    q = math.nan
    for n in (8, 16, 32, 64, 128, 256):
        q = variational.instability_rayleigh(2.0, variational.OptimizingSequenceSpec(n)).quotient
        if verbose:
            print(f"  Z=2 n={n:4d} quotient {q: .6f}")
        decreasing &= q < prev
        prev = q
    return [
        CheckResult("instability", "Z=2 quotient at n=256", q, -10.0, q < -10.0),
        CheckResult("instability", "Z=2 strictly decreasing", float(decreasing), 1.0, decreasing),
    ]


def _weyl() -> list[CheckResult]:
    out = []
    for k in (0.5, 1.0):
        res = [variational.weyl_residual(k, n, 0.1) for n in (4, 8, 16, 32)]
        ratio = min(a / b for a, b in zip(res, res[1:]))
        out.append(CheckResult("weyl", f"k={k} min decay per doubling", ratio, 1.4, ratio >= 1.4))
    return out


def run_checks(cfg: SweepConfig, verbose: bool = False) -> list[CheckResult]:
    """Run the selected suites with the configured seed."""
    rng = np.random.default_rng(cfg.seed)
    out: list[CheckResult] = []
    for suite in CHECK_SUITES:
        if suite not in cfg.checks:
            continue
        if suite == "identities":
            out += _identities(rng)
        elif suite == "hardy":
            out += _hardy()
        elif suite == "instability":
            out += _instability(verbose)
        else:
            out += _weyl()
    return out


# ---------------------------------------------------------------------------
# argument handling

_DEFAULTS = {
    "r_min": None, "r_max": None, "steps": None, "r_values": None, "length_unit": "bohr",
    "grid_nr": 600, "grid_nx4": 32, "grid_rmin": 1e-3, "grid_rmax": 40.0,
    "grid_stretch": 1.0, "grid_x4_ratio": 1.15, "l_max": 2, "out": None, "format": "csv",
    "seed": 0, "check": None, "workers": 1, "ladder_levels": 3,
}
_TYPES = {
    "r_min": float, "r_max": float, "steps": int, "r_values": str, "length_unit": str,
    "grid_nr": int, "grid_nx4": int, "grid_rmin": float, "grid_rmax": float,
    "grid_stretch": float, "grid_x4_ratio": float, "l_max": int, "out": str, "format": str,
    "seed": int, "check": str, "workers": int, "ladder_levels": int,
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="compact-hydrogen", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("sweep", "diagonalise over a list of radii"), ("check", "run identity and property suites")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="INI file with a [sweep] section; flags override it")
        p.add_argument("--r-min", type=float, help="smallest radius of an evenly spaced range")
        p.add_argument("--r-max", type=float, help="largest radius of the range")
        p.add_argument("--steps", type=int, help="number of radii in the range")
        p.add_argument("--r-values", help="comma-separated radii (instead of a range)")
        p.add_argument("--length-unit", choices=("bohr", "m"), help="unit of the radii given (default bohr)")
        p.add_argument("--grid-nr", type=int, help="radial unknowns")
        p.add_argument("--grid-nx4", type=int, help="x4 points (coarsest spacing 2 pi R / n when graded)")
        p.add_argument("--grid-rmin", type=float, help="inner Dirichlet radius")
        p.add_argument("--grid-rmax", type=float, help="outer Dirichlet radius")
        p.add_argument("--grid-stretch", type=float, help="radial clustering exponent")
        p.add_argument("--grid-x4-ratio", type=float, help="geometric x4 grading ratio; 0 for uniform")
        p.add_argument("--l-max", type=int, help="largest angular momentum in bound-state counts")
        p.add_argument("--out", help="output file (written atomically)")
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--seed", type=int)
        p.add_argument("--check", help="comma-separated suites: " + ",".join(CHECK_SUITES) + " or all")
        p.add_argument("--workers", type=int, help="parallel sweep points")
        p.add_argument("--ladder-levels", type=int, help="r_min decades for unstable radii")
    return ap


def _read_config(path: str) -> dict:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ConfigError(f"cannot read config file {path}")
    if not cp.has_section("sweep"):
        raise ConfigError(f"{path}: missing [sweep] section")
    out = {}
    for key, raw in cp.items("sweep"):
        k = key.replace("-", "_")
        if k not in _TYPES:
            raise ConfigError(f"{path}: unknown key {key!r}")
        try:
            out[k] = _TYPES[k](raw)
        except ValueError as exc:
            raise ConfigError(f"{path}: bad value for {key}: {raw!r}") from exc
    return out


def _resolve(ns: argparse.Namespace) -> dict:
    opts = dict(_DEFAULTS)
    if ns.config:
        opts.update(_read_config(ns.config))
    for k in _TYPES:
        v = getattr(ns, k, None)
        if v is not None:
            opts[k] = v
    return opts


def config_from_options(opts: dict, command: str) -> SweepConfig:
    """Build a :class:`SweepConfig` from merged file and flag options."""
    if opts["r_values"]:
        try:
            r = [float(s) for s in str(opts["r_values"]).split(",") if s.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --r-values: {opts['r_values']!r}") from exc
    elif opts["r_min"] is not None and opts["r_max"] is not None:
        steps = opts["steps"] or 2
        if steps < 1 or opts["r_max"] < opts["r_min"]:
            raise ConfigError("need steps >= 1 and r_max >= r_min")
        r = np.linspace(opts["r_min"], opts["r_max"], steps).tolist() if steps > 1 else [opts["r_min"]]
    elif command == "check":
        r = [0.1]
    else:
        raise ConfigError("give --r-values or --r-min/--r-max/--steps")
    if opts["length_unit"] == "m":
        r = [pot.meters_to_bohr(v) for v in r]
    r = sorted(set(r))
    if opts["check"]:
        checks = set(CHECK_SUITES) if opts["check"] == "all" else {s.strip() for s in opts["check"].split(",")}
    else:
        checks = set(CHECK_SUITES) if command == "check" else set()
    try:
        grid = solver.GridSpec(
            r_min=opts["grid_rmin"], r_max=opts["grid_rmax"], n_r=opts["grid_nr"], n_x4=opts["grid_nx4"],
            stretch=opts["grid_stretch"], x4_ratio=opts["grid_x4_ratio"] or None,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return SweepConfig(
        r_values=tuple(r), grid=grid, l_max=opts["l_max"], checks=frozenset(checks),
        output_path=opts["out"], output_format=opts["format"], seed=opts["seed"],
        workers=opts["workers"], ladder_levels=opts["ladder_levels"],
    )


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    try:
        cfg = config_from_options(_resolve(ns), ns.command)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = EXIT_OK
    if cfg.checks:
        results = run_checks(cfg, verbose=True)
        for res in results:
            print(res.line())
        if not all(res.passed for res in results):
            status = EXIT_CHECK
    if ns.command == "sweep":
        try:
            rows, diags = run_sweep(cfg)
        except OSError as exc:
            print(f"cannot write output: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if not cfg.output_path:
            sys.stdout.write(render(rows, diags, cfg))
        if any("error" in d for d in diags):
            return EXIT_SOLVER
    return status


if __name__ == "__main__":
    sys.exit(main())
