"""
Command-line front end.

    hamlab run CONFIG [--beta B ...] [--seed S] [--tol T] [--output DIR] [--workers W]
    hamlab list-catalogs
    hamlab period SYSTEM --emin E1 --emax E2 [--per-decade K] [--method M] [--param k=v ...]
    hamlab z SYSTEM --beta B [B ...] [--method M] [--deformation LABEL] [--h H] [--param k=v ...]

Exit codes: 0 success, 1 a contract cell failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from .. import __version__
from ..canonical_z import (
    EnsembleParams,
    z_boundary,
    z_deformed,
    z_direct,
    z_shell,
)
from ..deformations import CATALOG_LABELS, FORMULAS, get_deformation
from ..errors import ConfigError, HamlabError
from ..fock_nonlinear import F_FORMULAS
from ..hilbert_finite import TEST_SYSTEMS
from ..period_lab import METHODS as PERIOD_METHODS
from ..period_lab import log_energy_grid, period
from ..phase_flow import SYSTEM_CATALOG, SYSTEM_DEFAULTS, make_system
from .config import EXPERIMENT_KINDS, KIND_KEYS, apply_overrides, load_config
from .report import summary_text, write_report
from .runner import run

Z_METHODS = ("direct", "shell", "boundary", "deformed")

EXIT_OK, EXIT_CONTRACT, EXIT_INPUT = 0, 1, 2


def _env_workers() -> int | None:
    raw = os.environ.get("HAMLAB_WORKERS")
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"HAMLAB_WORKERS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise ConfigError(f"HAMLAB_WORKERS must be a positive integer, got {raw!r}")
    return value


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--param expects key=value, got {item!r}")
        try:
            out[key] = float(value)
        except ValueError:
            raise ConfigError(f"--param {key}: {value!r} is not a number") from None
    return out


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    cfg = apply_overrides(cfg, betas=args.beta, seed=args.seed, tol=args.tol,
                          output=args.output, workers=args.workers)
    env = _env_workers()
    workers = env if env is not None else cfg.workers
    result = run(cfg, workers=workers)
    paths = write_report(result, cfg.output, workers)
    if not args.quiet:
        sys.stdout.write(summary_text(result))
    print(f"report written to {paths['json']}, {paths['csv']}, {paths['summary']}")
    return EXIT_CONTRACT if result.contract_failed else EXIT_OK


def cmd_list_catalogs(_args) -> int:
    print("systems:")
    for name in sorted(SYSTEM_CATALOG):
        params = ", ".join(f"{k}={v:g}" for k, v in SYSTEM_DEFAULTS[name].items())
        print(f"  {name:18s} ({params})")
    print("deformations:")
    for label in CATALOG_LABELS:
        print(f"  {label:18s} f(x) = {FORMULAS[label]}")
    print(f"  {'tanh':18s} f(x) = tanh(x)  (rejected by the screen: bounded)")
    print("nonlinear f (Fock):")
    for label, formula in F_FORMULAS.items():
        print(f"  {label:18s} f(n) = {formula}")
    print("quantum test systems:")
    for label in TEST_SYSTEMS:
        print(f"  {label}")
    print("experiments:")
    for kind in EXPERIMENT_KINDS:
        print(f"  {kind:22s} keys: {', '.join(KIND_KEYS[kind])}")
    print("period methods: " + ", ".join(PERIOD_METHODS))
    print("z methods: " + ", ".join(Z_METHODS))
    return EXIT_OK


def cmd_period(args) -> int:
    system = make_system(args.system, **_parse_params(args.param))
    energies = log_energy_grid(args.emin, args.emax, args.per_decade)
    print(f"# system={system.label} method={args.method}")
    print(f"{'E':>22s} {'tau':>22s}")
    for E in energies:
        print(f"{E:22.15e} {period(system, float(E), args.method, args.tol):22.15e}")
    return EXIT_OK


def cmd_z(args) -> int:
    system = make_system(args.system, **_parse_params(args.param))
    if args.method == "deformed" and args.deformation is None:
        raise ConfigError("--method deformed needs --deformation LABEL")
    deformation = get_deformation(args.deformation, args.beta0) if args.deformation else None
    print(f"# system={system.label} method={args.method} h={args.h!r}")
    print(f"{'beta':>12s} {'Z':>24s} {'error_bound':>12s}")
    for beta in args.beta:
        params = EnsembleParams(beta, args.h)
        if args.method == "direct":
            est = z_direct(system, params, args.tol)
        elif args.method == "shell":
            est = z_shell(system, params, tol=args.tol)
        elif args.method == "boundary":
            est = z_boundary(system, params)
        else:
            est = z_deformed(system, deformation, params, tol=args.tol)
        print(f"{beta:12.6g} {est.value:24.16e} {est.error_bound:12.3e}")
    return EXIT_OK


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamlab", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("--version", action="version", version=f"hamlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config and write a report")
    p.add_argument("config")
    p.add_argument("--beta", type=_positive, nargs="+", help="replace the beta grid")
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--output", help="report directory")
    p.add_argument("--workers", type=int)
    p.add_argument("--quiet", action="store_true", help="do not print the summary")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("list-catalogs", help="list systems, deformations and other catalogs")
    p.set_defaults(func=cmd_list_catalogs)

    p = sub.add_parser("period", help="tabulate the period function")
    p.add_argument("system", choices=sorted(SYSTEM_CATALOG))
    p.add_argument("--emin", type=_positive, required=True)
    p.add_argument("--emax", type=_positive, required=True)
    p.add_argument("--per-decade", type=int, default=3)
    p.add_argument("--method", default="auto", choices=("auto",) + PERIOD_METHODS)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_period)

    p = sub.add_parser("z", help="evaluate the classical partition function")
    p.add_argument("system", choices=sorted(SYSTEM_CATALOG))
    p.add_argument("--beta", type=_positive, nargs="+", required=True)
    p.add_argument("--method", default="direct", choices=Z_METHODS)
    p.add_argument("--deformation")
    p.add_argument("--beta0", type=_positive, default=1.0)
    p.add_argument("--h", type=_positive, default=2 * math.pi)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_z)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, HamlabError, ValueError) as exc:
        print(f"hamlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
