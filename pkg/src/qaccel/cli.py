"""Command-line entry point: ``qaccel simulate|sweep|audit|convergence``."""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, load_config
from .runner import (DEFAULT_TOLERANCE, EXIT_CONFIG, random_sweep, run_audit, run_convergence,
                     run_scenario)

OUT_DIR_ENV = "QACCEL_OUT_DIR"


def _int_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return out


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse {text!r} as comma-separated numbers") from None
    if not vals or min(vals) <= 0:
        raise argparse.ArgumentTypeError("run times must be positive")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=os.environ.get(OUT_DIR_ENV, "qaccel-out"),
                        help=f"output directory (default: ${OUT_DIR_ENV} or ./qaccel-out)")
    common.add_argument("--tolerance", type=float, default=None,
                        help=f"relative slack tolerance for bound checks (default {DEFAULT_TOLERANCE:g})")
    common.add_argument("--steps", type=int, default=None, help="override the number of time steps")
    common.add_argument("--method", choices=("midpoint", "rk4"), default=None, help="override the stepper")
    common.add_argument("-q", "--quiet", action="store_true", help="do not print the summary")

    parser = argparse.ArgumentParser(prog="qaccel", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run one scenario and check its bounds")
    p.add_argument("config", help="scenario file or bundled scenario name")

    p = sub.add_parser("sweep", parents=[common], help="randomized property sweep of the pointwise inequalities")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--dims", type=_int_list, default=list(range(2, 9)), help="e.g. 2-8 or 2,4,8")
    p.add_argument("--count", type=int, default=1000, help="instances per inequality")
    p.add_argument("--hbar", type=float, default=1.0)

    p = sub.add_parser("audit", parents=[common], help="adiabatic run-time certificates for several run times")
    p.add_argument("config", help="adiabatic scenario file or bundled name")
    p.add_argument("--runtimes", type=_float_list, default=[1.0, 5.0, 20.0], help="e.g. 1,5,20")

    p = sub.add_parser("convergence", parents=[common], help="observed order of the steppers")
    p.add_argument("config", help="scenario file or bundled name")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sweep":
            if args.count < 1:
                raise ConfigError("--count must be >= 1")
            arts = random_sweep(args.seed, args.dims, args.count, hbar=args.hbar,
                                tolerance=args.tolerance or DEFAULT_TOLERANCE)
        else:
            cfg = load_config(args.config)
            if args.command == "simulate":
                arts = run_scenario(cfg, tolerance=args.tolerance, n_steps=args.steps, method=args.method)
            elif args.command == "audit":
                if cfg.family != "adiabatic":
                    raise ConfigError(f"{cfg.source}: audit needs an adiabatic scenario, got {cfg.family!r}")
                arts = run_audit(cfg, args.runtimes, n_steps=args.steps, method=args.method,
                                 tolerance=args.tolerance or 1e-6)
            else:
                methods = (args.method,) if args.method else ("midpoint", "rk4")
                arts = run_convergence(cfg, n_base=args.steps or 64, methods=methods)
    except (ConfigError, ValueError) as exc:
        print(f"qaccel: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    arts.write(args.out_dir)
    if not args.quiet:
        sys.stdout.write(arts.text())
    if arts.worst:
        print(f"qaccel: bound violated: {arts.worst}", file=sys.stderr)
    return arts.exit_code


if __name__ == "__main__":
    sys.exit(main())
