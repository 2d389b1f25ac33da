"""Command line front end: ``vvlab sweep | diagnose | selftest | zeros | coeffs``.

Output columns
--------------
sweep     nu, sup_l2_error, alpha_running, then one column per diagnostic
diagnose  diagnostic, nu, t_or_T, value, error_estimate
zeros     k, j1k, J0_at_j1k, sign
coeffs    k, j1k, a_k

All numbers are written with 17 significant digits.  Exit status is 0 on
success, 1 when a computation fails and 2 for bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import platform
import sys

import numpy as np
import scipy

from . import __version__
from .config import ExperimentConfig, load_config, parse_data, profile_from_string
from .disk_flow import DEFAULT_K, project_initial
from .errors import ConfigError, VVLabError
from .experiment import DIAGNOSTIC_HELP, DIAGNOSTICS, evaluate_diagnostic
from .rates import alpha_running, nu_sweep
from .specfun import j1_zeros

EXIT_COMPUTE = 1
EXIT_INPUT = 2


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return f"{x:.17g}"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def _emit(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def versions():
    return {
        "vvlab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
    }


def _json_float(x):
    # JSON has no nan; keep the value auditable as a string
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else str(x)


# ---------------------------------------------------------------------------
# Config assembly: file first, then flags on top
# ---------------------------------------------------------------------------


def _split_floats(values, name):
    out = []
    for item in values:
        for piece in str(item).split(","):
            piece = piece.strip()
            if not piece:
                continue
            try:
                out.append(float(piece))
            except ValueError:
                raise ConfigError([f"--{name}: not a number: {piece!r}"])
    return out


def _assemble(args) -> ExperimentConfig:
    if args.config:
        base = load_config(args.config)
        data, base_dir = base.echo(), base.base_dir
    else:
        data, base_dir = {}, os.getcwd()
    if args.flow is not None:
        data["flow"] = args.flow
    if args.profile is not None:
        data["profile"] = profile_from_string(args.profile)
    if getattr(args, "nu", None):
        data["nu_grid"] = _split_floats(args.nu, "nu")
    for key in ("T", "K"):
        if getattr(args, key, None) is not None:
            data[key] = getattr(args, key)
    if args.half_width is not None:
        data["half_width"] = args.half_width
    layer = dict(data.get("layer", {}))
    for flag, key in (("delta", "delta"), ("delta_star", "delta_star"), ("c", "kato_constant")):
        if getattr(args, flag, None) is not None:
            layer[key] = getattr(args, flag)
    if layer:
        data["layer"] = layer
    if getattr(args, "diag", None):
        data["diagnostics"] = [d for item in args.diag for d in item.split(",") if d]
    output = dict(data.get("output", {}))
    if getattr(args, "output", None) is not None:
        output["path"] = args.output
    if getattr(args, "format", None) is not None:
        output["format"] = args.format
    if output:
        data["output"] = output
    return parse_data(data, base_dir)


def _add_experiment_flags(p, nu_help):
    p.add_argument("--config", help="JSON experiment file; flags override its fields")
    p.add_argument("--flow", choices=["disk", "shear"])
    p.add_argument("--profile", help="constant:V | poly:c0,c1,.. | exp:A,b | gaussian_poly:c0,.. | table:PATH")
    p.add_argument("--nu", action="append", help=nu_help)
    p.add_argument("--T", type=float, help="final time")
    p.add_argument("--K", type=int, help=f"disk modes (default {DEFAULT_K})")
    p.add_argument("--half-width", dest="half_width", type=float, help="shear channel half width L")
    p.add_argument("--delta", type=float, help="layer width delta")
    p.add_argument("--delta-star", dest="delta_star", type=float, help="cutoff inner width")
    p.add_argument("--c", type=float, help="Kato layer constant")
    p.add_argument("--diag", action="append", help="diagnostic name (repeat or comma separate)")
    p.add_argument("--output", "-o", help="output path (default stdout)")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def sweep_summary(cfg: ExperimentConfig, result) -> dict:
    running = alpha_running(result.rows)
    rows = []
    for row, a in zip(result.rows, running):
        entry = {"nu": row.nu, "sup_l2_error": row.sup_error, "alpha_running": _json_float(a)}
        entry.update({k: _json_float(v) for k, v in row.values.items()})
        rows.append(entry)
    fit = None
    if result.fit is not None:
        fit = {"alpha": result.fit.alpha, "prefactor": result.fit.prefactor,
               "rms_residual": result.fit.residual, "points": result.fit.points}
    return {
        "config_echo": cfg.echo(),
        "fingerprint": result.fingerprint,
        "rows": rows,
        "fit": fit,
        "fit_message": result.fit_message,
        "versions": versions(),
    }


def sweep_csv(cfg: ExperimentConfig, result) -> str:
    header = ["nu", "sup_l2_error", "alpha_running"] + list(cfg.diagnostics)
    running = alpha_running(result.rows)
    rows = [[r.nu, r.sup_error, a] + [r.values[d] for d in cfg.diagnostics] for r, a in zip(result.rows, running)]
    return _csv_text(header, rows)


def cmd_sweep(args):
    cfg = _assemble(args)
    result = nu_sweep(cfg.to_experiment(), cfg.nu_grid, args.workers)
    summary = json.dumps(sweep_summary(cfg, result), indent=2, sort_keys=True) + "\n"
    path = cfg.output.get("path")
    if cfg.output.get("format") == "json":
        _emit(summary, path)
    else:
        _emit(sweep_csv(cfg, result), path)
        if path not in (None, "-"):
            _emit(summary, os.path.splitext(path)[0] + ".json")
    if result.fit is None:
        print(f"vvlab: no rate fit: {result.fit_message}", file=sys.stderr)
    return 0


def cmd_diagnose(args):
    if not args.diag:
        raise ConfigError(["--diag: at least one diagnostic is required"])
    if not args.nu:
        raise ConfigError(["--nu: at least one viscosity is required"])
    cfg = _assemble(args)
    exp = cfg.to_experiment()
    rows = []
    for nu in cfg.nu_grid:
        for name in cfg.diagnostics:
            t, value, err = evaluate_diagnostic(exp, name, nu)
            rows.append([name, nu, t, value, err])
    _emit(_csv_text(["diagnostic", "nu", "t_or_T", "value", "error_estimate"], rows), cfg.output.get("path"))
    return 0


def cmd_zeros(args):
    if args.count < 1:
        raise ConfigError(["--count: must be at least 1"])
    table = j1_zeros(args.count)
    rows = [[k + 1, table.zeros[k], table.j0_at_zeros[k], table.signs[k]] for k in range(table.count)]
    _emit(_csv_text(["k", "j1k", "J0_at_j1k", "sign"], rows), args.output)
    return 0


def cmd_coeffs(args):
    if args.K < 1:
        raise ConfigError(["--K: must be at least 1"])
    spec = profile_from_string(args.profile)
    from .config import build_profile

    profile = build_profile("disk", parse_data(
        {"flow": "disk", "profile": spec, "nu_grid": [1.0]}, os.getcwd()).profile, os.getcwd())
    table = j1_zeros(args.K)
    coeffs = project_initial(profile, table)
    rows = [[k + 1, table.zeros[k], coeffs[k]] for k in range(table.count)]
    _emit(_csv_text(["k", "j1k", "a_k"], rows), args.output)
    return 0


def cmd_selftest(args):
    from .selftest import run_selftest

    failures = run_selftest(sys.stdout)
    return 1 if failures else 0


def build_parser():
    diag_lines = "\n".join(f"  {k:14s} {v}" for k, v in DIAGNOSTIC_HELP.items())
    parser = argparse.ArgumentParser(
        prog="vvlab",
        description="Vanishing viscosity experiments for the disk and shear flows.",
        epilog=__doc__.split("Output columns", 1)[1].join(["Output columns", ""]) + "\ndiagnostics:\n" + diag_lines,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"vvlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="viscosity sweep with rate fit",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog="CSV columns: nu, sup_l2_error, alpha_running, <diagnostics...>\n"
                              "With --format csv and a file path, a JSON summary is written next to it.")
    _add_experiment_flags(p, "viscosities (repeat or comma separate); at least 4 spanning 2 decades")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--workers", type=int, help="parallel rows, capped by VVLAB_THREADS")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("diagnose", help="evaluate diagnostics at given viscosities",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog="CSV columns: diagnostic, nu, t_or_T, value, error_estimate\n\n" + diag_lines)
    _add_experiment_flags(p, "viscosity (repeat or comma separate)")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("selftest", help="run the built-in quick checks")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("zeros", help="dump zeros of J1 with J0 there")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_zeros)

    p = sub.add_parser("coeffs", help="dump disk projection coefficients")
    p.add_argument("--profile", default="constant:2")
    p.add_argument("--K", type=int, default=50)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_coeffs)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"vvlab: error: {line}", file=sys.stderr)
        return EXIT_INPUT
    except VVLabError as exc:
        print(f"vvlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except ValueError as exc:
        print(f"vvlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
