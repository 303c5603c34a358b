"""Command-line front end.

Exit codes: 0 on success, 2 for configuration errors, 1 for numerical failures.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import harness, rational
from .kron import LinearSolveError
from .spectral import ConvergenceError

EXIT_OK, EXIT_NUMERIC, EXIT_CONFIG = 0, 1, 2

# flag name -> config key
_FLAGS = {
    "N": "N", "dt": "dt", "nt": "nt", "T_max": "T_max", "engine": "engine",
    "variant": "variant", "stepper": "stepper", "K": "K", "profile": "family",
    "type": "kind", "c0": "c0", "domain": "domain", "out": "out_dir", "jobs": "jobs",
}


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise harness.ConfigError(message)


def _run_options(p: argparse.ArgumentParser):
    p.add_argument("-c", "--config", help="key=value configuration file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any configuration key (repeatable)")
    g = p.add_argument_group("common overrides")
    g.add_argument("--N", help="polynomial degree in both directions")
    g.add_argument("--dt", help="time step")
    g.add_argument("--nt", help="number of time levels including t=0 (sets dt)")
    g.add_argument("--T-max", dest="T_max", help="final time")
    g.add_argument("--engine", help="HF or TBC")
    g.add_argument("--variant", help="CQ or CP (HF); CQ or NP (TBC)")
    g.add_argument("--stepper", help="BDF1, BDF2 (HF only) or TR")
    g.add_argument("--K", help="Padé order")
    g.add_argument("--profile", help="CG or HG")
    g.add_argument("--type", help="IIA or IIB")
    g.add_argument("--c0", help="profile speed")
    g.add_argument("--domain", help="x_l,x_r,x_b,x_t")
    g.add_argument("--out", help="output directory")
    g.add_argument("--jobs", help="parallel runs for convergence studies")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgParser(prog="schrotbc", description=(
        "Spectral solvers for the free Schrödinger equation on a rectangle with "
        "transparent or high-frequency boundary conditions."))
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    p = sub.add_parser("evolve", help="run once and write the error history e(t)")
    _run_options(p)

    p = sub.add_parser("converge", help="max-error over a set of time steps and fitted order")
    _run_options(p)
    p.add_argument("--dts", help="comma-separated time steps (default: config dts)")

    p = sub.add_parser("dump-field", help="write the field on a 256x256 grid at given times")
    _run_options(p)
    p.add_argument("--times", help="comma-separated output times (default: config dump_times)")

    p = sub.add_parser("weights", help="print convolution-quadrature weights as CSV")
    p.add_argument("--scheme", default="BDF1", choices=rational.SCHEMES)
    p.add_argument("--nu", type=float, default=0.5, choices=(0.5, -0.5))
    p.add_argument("-n", type=int, default=16, help="number of weights")
    p.add_argument("--out", help="CSV file (default: stdout)")

    p = sub.add_parser("dump-matrices", help="write the operators as sparse triplet files")
    _run_options(p)
    return parser


def _config(args) -> harness.RunConfig:
    overrides = [f"{key}={getattr(args, flag)}" for flag, key in _FLAGS.items()
                 if getattr(args, flag, None) is not None]
    return harness.load_config(args.config, overrides + list(args.set))


def _floats(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise harness.ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _cmd_evolve(args) -> int:
    cfg = _config(args)
    path = Path(cfg.out_dir) / f"evolution_{cfg.engine}_{cfg.variant}-{cfg.stepper}.csv"
    res = harness.run_evolution(cfg, path)
    print(f"{cfg.label}: max e = {res.max_error:.6e} over {cfg.n_steps} steps -> {path}")
    return EXIT_OK


def _cmd_converge(args) -> int:
    cfg = _config(args)
    dts = _floats(args.dts) if args.dts else None
    path = Path(cfg.out_dir) / f"convergence_{cfg.engine}_{cfg.variant}-{cfg.stepper}.csv"
    res = harness.run_convergence(cfg, dts, path)
    for dt, e, used in zip(res.dts, res.max_errors, res.fit.used):
        print(f"dt={dt:.6e}  e_max={e:.6e}{'' if used else '  (plateau)'}")
    print("slope: " + ("undefined" if res.slope is None else f"{res.slope:.4f}"))
    return EXIT_OK


def _cmd_dump_field(args) -> int:
    cfg = _config(args)
    times = _floats(args.times) if args.times else None
    for path in harness.dump_field(cfg, times):
        print(path)
    return EXIT_OK


def _cmd_weights(args) -> int:
    if args.n < 1:
        raise harness.ConfigError("-n must be >= 1")
    w = rational.cq_weights(args.scheme, args.nu, args.n)
    rows = [(k, float(v)) for k, v in enumerate(w.omega)]
    if args.out:
        harness.write_csv(args.out, ["k", "omega"], rows)
    else:
        print("k,omega")
        for k, v in rows:
            print(f"{k},{harness.FLOAT_FMT.format(v)}")
    return EXIT_OK


def _cmd_dump_matrices(args) -> int:
    cfg = _config(args)
    for path in harness.dump_matrices(cfg):
        print(path)
    return EXIT_OK


_COMMANDS = {
    "evolve": _cmd_evolve, "converge": _cmd_converge, "dump-field": _cmd_dump_field,
    "weights": _cmd_weights, "dump-matrices": _cmd_dump_matrices,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return _COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (LinearSolveError, ConvergenceError, FloatingPointError, ZeroDivisionError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
