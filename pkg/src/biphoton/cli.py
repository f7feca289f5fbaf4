"""Command-line front end: ``biphoton {scan,map,interfere,schmidt,validate}``.

Every command writes CSV with a ``#``-prefixed header echoing the resolved
configuration.  Exit codes: 0 success, 1 validation failure, 2 bad input.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import checks
from . import grid as g
from . import interferometer as itf
from . import schmidt as s
from .model import (
    CONFIG_KEYS,
    OpticalConfig,
    config_to_json_dict,
    coord_coeffs,
    momentum_coeffs,
    reference_config,
)

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT = 0, 1, 2


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    optical: OpticalConfig
    grid_points: int = 512
    grid_halfwidth_factor: float = 6.0
    z_min_m: float = 0.0
    z_max_m: float = 0.2
    z_steps: int = 201

    def __post_init__(self):
        if self.z_min_m < 0:
            raise UsageError("z_min_m must be >= 0")
        if self.z_max_m < self.z_min_m:
            raise UsageError("z_max_m must be >= z_min_m")
        if self.z_steps < 2:
            raise UsageError("z_steps must be >= 2")
        if self.grid_points < 16 or self.grid_points % 2:
            raise UsageError("grid_points must be even and >= 16")
        if not self.grid_halfwidth_factor > 0:
            raise UsageError("grid_halfwidth_factor must be > 0")

    def as_dict(self) -> dict:
        d = config_to_json_dict(self.optical)
        for f in fields(self):
            if f.name != "optical":
                d[f.name] = getattr(self, f.name)
        return d


RUN_KEYS = {"grid_points": int, "grid_halfwidth_factor": float,
            "z_min_m": float, "z_max_m": float, "z_steps": int}


def load_run_config(path: str | None) -> RunConfig:
    """Read a flat JSON config; missing keys fall back to the reference config."""
    base = config_to_json_dict(reference_config())
    run = {"grid_points": 512, "grid_halfwidth_factor": 6.0,
           "z_min_m": 0.0, "z_max_m": 0.2, "z_steps": 201}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("config must be a JSON object")
        unknown = set(raw) - set(CONFIG_KEYS) - set(RUN_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key, value in raw.items():
            if key in CONFIG_KEYS:
                base[key] = float(value)
            else:
                run[key] = RUN_KEYS[key](value)
    optical = OpticalConfig(**{CONFIG_KEYS[k]: v for k, v in base.items()})
    return RunConfig(optical, **run)


# -- output ---------------------------------------------------------------------------

def _fmt(x) -> str:
    return f"{x:.11e}"


def _header(run: RunConfig, command: str, extra: dict | None = None) -> list[str]:
    lines = [f"# generated: {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}",
             f"# command: {command}"]
    for k, v in run.as_dict().items():
        lines.append(f"# config.{k} = {v!r}")
    for k, v in (extra or {}).items():
        lines.append(f"# {k} = {v}")
    return lines


def write_atomic(path: str | None, lines: list[str]):
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _resolve_z(value: str, optical: OpticalConfig, z_max: float) -> float:
    if value == "z0":
        return s.find_migration_point(optical, max(z_max, 1.0))
    try:
        z = float(value)
    except ValueError as exc:
        raise UsageError(f"--z must be a distance in meters or 'z0', got {value!r}") from exc
    if z < 0:
        raise UsageError("--z must be >= 0")
    return z


# -- commands -------------------------------------------------------------------------

def scan_rows(optical: OpticalConfig, zs) -> list[list[float]]:
    rows = []
    fp = s.fedorov_momentum(optical)
    for z in zs:
        m = momentum_coeffs(optical, z)
        K = s.schmidt_number(m.A, m.B)
        pp, pm = s.interferometer_probabilities(m.A, m.B)
        rows.append([z, s.ellipticity(optical, z), s.fedorov_coordinate(optical, z), fp, K, pp, pm])
    return rows


def cmd_scan(run: RunConfig, args) -> int:
    zs = np.linspace(run.z_min_m, run.z_max_m, run.z_steps)
    rows = scan_rows(run.optical, zs)
    lines = _header(run, "scan")
    lines.append("z_m,ellipticity,fedorov_x,fedorov_p,schmidt_K,p_plus,p_minus")
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    try:
        z0 = s.find_migration_point(run.optical, run.z_max_m) if run.z_max_m > 0 else None
        lines.append(f"# z0_m = {_fmt(z0)}")
    except s.NoMigrationPointError:
        lines.append("# z0_m = none")
    write_atomic(args.out, lines)
    return EXIT_OK


def cmd_map(run: RunConfig, args) -> int:
    z = _resolve_z(args.z, run.optical, run.z_max_m)
    spec = g.default_grid(run.optical, z, args.space, run.grid_points, run.grid_halfwidth_factor)
    if args.space == "momentum":
        field = g.sample_momentum_grid(run.optical, z, spec)
        names = ("p_s_per_m", "p_i_per_m", "rate")
    else:
        field = g.sample_coordinate_grid(run.optical, z, spec)
        names = ("x_s_m", "x_i_m", "rate")
    ratio, angle = g.principal_axes(field)
    extra = {"z_m": _fmt(z), "space": args.space,
             "principal_axis_ratio": _fmt(ratio),
             "major_axis_angle_deg": f"{math.degrees(angle):.6f}",
             "ellipticity": _fmt(s.ellipticity(run.optical, z))}
    lines = _header(run, "map", extra)
    lines.append(",".join(names))
    rate = np.abs(field.values) ** 2
    cs, ci = field.coords_s, field.coords_i
    for i in range(field.points):
        for j in range(field.points):
            lines.append(f"{_fmt(cs[i])},{_fmt(ci[j])},{_fmt(rate[i, j])}")
    write_atomic(args.out, lines)
    return EXIT_OK


def interference_report(run: RunConfig, z: float, x_i: float | None, n_slice: int = 401):
    """Analytic and simulated port probabilities plus the fringe slice along x_s."""
    optical = run.optical
    m = momentum_coeffs(optical, z)
    K = s.schmidt_number(m.A, m.B)
    pp, pm = s.interferometer_probabilities(m.A, m.B)
    spec = g.default_grid(optical, z, "coordinate", run.grid_points, run.grid_halfwidth_factor)
    field = g.sample_coordinate_grid(optical, z, spec)
    sim = itf.simulate_interferometer(field, field)
    try:
        k_sim = sim.schmidt_number
    except ValueError:
        k_sim = math.inf
    published = s.fringe_params(optical, z)
    exact = s.slice_fringe_params(optical, z)
    if x_i is None:
        x_i = math.sqrt(2.0 / published.R_plus)
    report = {"z_m": z, "x_i_m": x_i, "K": K, "K_sim": k_sim,
              "p_plus": pp, "p_minus": pm, "p_plus_sim": sim.p_plus, "p_minus_sim": sim.p_minus,
              "R_plus_per_m2": published.R_plus, "I_minus_per_m2": published.I_minus}
    for label, params in (("", published), ("_exact", exact)):
        try:
            theta = s.fringe_phase_of_maximum(params, x_i, 2)
            report["second_max_x_s_m" + label] = theta / (2 * abs(params.I_minus * x_i))
            report["theta_star_over_pi" + label] = theta / math.pi
        except s.FringeError:
            report["second_max_x_s_m" + label] = math.nan
            report["theta_star_over_pi" + label] = math.nan
    half = 4.0 / math.sqrt(exact.R_plus)
    xs = np.linspace(-half, half, n_slice)
    pts_s = np.stack([xs, np.zeros_like(xs)], axis=-1)
    pts_i = np.tile([x_i, 0.0], (n_slice, 1))
    c = coord_coeffs(optical, z)
    slice_rows = np.column_stack([xs, s.p_diff(published, pts_s, pts_i), s.p_diff_exact(c, pts_s, pts_i)])
    return report, slice_rows


def cmd_interfere(run: RunConfig, args) -> int:
    z = _resolve_z(args.z, run.optical, run.z_max_m)
    if args.x_i is not None and args.x_i == 0:
        raise UsageError("--x-i must be nonzero for a fringe slice")
    report, rows = interference_report(run, z, args.x_i)
    lines = _header(run, "interfere", {k: _fmt(v) for k, v in report.items()})
    lines.append("x_s_m,p_diff,p_diff_exact")
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    write_atomic(args.out, lines)
    return EXIT_OK


def cmd_schmidt(run: RunConfig, args) -> int:
    z = _resolve_z(args.z, run.optical, run.z_max_m)
    m = momentum_coeffs(run.optical, z)
    data = s.schmidt_spectrum(s.schmidt_params(m.A, m.B))
    spec = g.default_grid(run.optical, z, "coordinate", run.grid_points, run.grid_halfwidth_factor)
    lam_num, k_num = g.numeric_schmidt(g.sample_coordinate_grid(run.optical, z, spec))
    extra = {"z_m": _fmt(z), "a": _fmt(data.a), "b": _fmt(data.b), "c": _fmt(data.c), "w": _fmt(data.w),
             "K1d": _fmt(data.K1d), "K": _fmt(data.K), "K_svd": _fmt(k_num)}
    lines = _header(run, "schmidt", extra)
    lines.append("n,lambda_closed,lambda_svd")
    n = min(len(data.eigenvalues), len(lam_num), args.modes)
    lines += [f"{i},{_fmt(data.eigenvalues[i])},{_fmt(lam_num[i])}" for i in range(n)]
    write_atomic(args.out, lines)
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        run = load_run_config(args.config)
    except (ValueError, TypeError) as exc:
        print(f"FAIL  [config] config invariants: {exc}")
        return EXIT_FAIL
    points = args.grid_points or run.grid_points
    results = checks.run_checks(run.optical, points=points, seed=args.seed, n_random=args.random_configs)
    lines = [r.line() for r in results]
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    print("\n".join(lines))
    if args.out:
        write_atomic(args.out, lines)
    return EXIT_OK if n_fail == 0 else EXIT_FAIL


# -- argument parsing ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config (defaults to the shipped reference config)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--grid-points", type=int, help="points per grid axis")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")

    parser = argparse.ArgumentParser(prog="biphoton", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("scan", parents=[common], help="ellipticity, Fedorov ratios and K versus z")

    p = sub.add_parser("map", parents=[common], help="joint coincidence map on one transverse axis")
    p.add_argument("--z", default="0", help="distance in meters, or 'z0'")
    p.add_argument("--space", choices=("coordinate", "momentum"), default="coordinate")

    p = sub.add_parser("interfere", parents=[common], help="Dove-prism interferometer and fringe slice")
    p.add_argument("--z", default="0", help="distance in meters, or 'z0'")
    p.add_argument("--x-i", type=float, default=None, help="idler coordinate of the fringe slice (m)")

    p = sub.add_parser("schmidt", parents=[common], help="closed-form and SVD Schmidt spectra")
    p.add_argument("--z", default="0", help="distance in meters, or 'z0'")
    p.add_argument("--modes", type=int, default=64, help="number of eigenvalues to list")

    p = sub.add_parser("validate", parents=[common], help="run the invariant suite")
    p.add_argument("--random-configs", type=int, default=20)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code else EXIT_OK
    if args.command == "validate":
        return cmd_validate(args)
    try:
        run = load_run_config(args.config)
        if args.grid_points is not None:
            run.grid_points = args.grid_points
            run.__post_init__()
        handler = {"scan": cmd_scan, "map": cmd_map, "interfere": cmd_interfere,
                   "schmidt": cmd_schmidt}[args.command]
        return handler(run, args)
    except (UsageError, ValueError, TypeError) as exc:
        print(f"biphoton {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
