"""Command line interface: ``bbwave run | sweep-dt | sweep-N | reproduce-table | validate``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 validation failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import checks
from .config import ConfigError, RunConfig, dump_config, load_config, parse_config
from .dynamics import UnsupportedSystemError
from .experiments import (
    PUBLISHED_ERRORS,
    TABLE_SETUPS,
    format_table,
    rate_table,
    run,
    sweep_dt,
    sweep_n,
    table_config,
)
from .model import AnalysisError, ParameterError
from .timestepper import NonConvergenceError
from .waves import NoSolitaryWaveError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3

log = logging.getLogger("bbwave")

CONFIG_ERRORS = (ConfigError, ParameterError, NoSolitaryWaveError, UnsupportedSystemError,
                 AnalysisError)


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                   help="override one configuration key (repeatable)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--snapshots", metavar="T1,T2,...", help="times at which to write snapshots")
    p.add_argument("--stride", type=int, metavar="K", help="diagnostics every K steps")
    p.add_argument("--dealias", action="store_true", default=None, help="apply the 2/3 rule")
    p.add_argument("--tol", type=float, metavar="X", help="fixed-point tolerance")
    p.add_argument("--max-iter", type=int, metavar="K", help="fixed-point iteration cap")
    p.add_argument("--jobs", type=int, default=1, help="concurrent sweep cells")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbwave", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one configuration")
    _common(p)

    p = sub.add_parser("sweep-dt", help="repeat a run over successively halved time steps")
    _common(p)
    p.add_argument("--dts", type=_float_list, help="explicit time steps (default: dt halved 3 times)")
    p.add_argument("--levels", type=int, default=4, help="number of steps when --dts is absent")

    p = sub.add_parser("sweep-N", help="repeat a run over grid sizes at a fixed time step")
    _common(p)
    p.add_argument("--Ns", type=_int_list, default=checks.SWEEP_NS)

    p = sub.add_parser("reproduce-table", help="solitary-wave convergence table")
    p.add_argument("--setup", choices=TABLE_SETUPS, default="literal",
                   help="literal: as published; exact: exact speed; centred: exact speed with "
                        "the wave centred over the run; surface: gamma=0, delta=1 at half steps")
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("validate", help="run the property and oracle checks")
    p.add_argument("--full", action="store_true", help="include the long solitary/symmetry runs")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.set:
        base = dump_config(cfg) + "\n".join(args.set) + "\n"
        for item in args.set:
            if "=" not in item:
                raise ConfigError("--set", f"expected KEY=VALUE, got {item!r}")
        cfg = parse_config(base)
    overrides = {}
    if args.out is not None:
        overrides["out"] = args.out
    if args.snapshots is not None:
        try:
            overrides["snapshots"] = _float_list(args.snapshots)
        except argparse.ArgumentTypeError as exc:
            raise ConfigError("snapshots", str(exc)) from None
    for key in ("stride", "dealias", "tol", "max_iter"):
        value = getattr(args, key)
        if value is not None:
            overrides[key] = value
    return replace(cfg, **overrides).validate()


def _report_table(cells, key: str, out_dir) -> int:
    text = format_table(rate_table(cells, key), key)
    print(text)
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "rates.txt").write_text(text + "\n")
    failed = [c for c in cells if c.failure]
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    res = run(cfg, cfg.out)
    drift = res.hamiltonian_drift
    print(f"t={res.final.t:g}  H={res.records[-1].H:.12e}  max|H-H0|={drift.max():.3e}")
    if res.errors:
        for name in ("zeta", "v1"):
            l2, linf = res.errors[name]
            print(f"{name:>5}: L2 error {l2:.4e}  Linf error {linf:.4e}")
    print(f"output written to {cfg.out}")
    return EXIT_OK


def cmd_sweep_dt(args) -> int:
    cfg = resolve_config(args)
    dts = args.dts or tuple(cfg.dt / 2**i for i in range(args.levels))
    return _report_table(sweep_dt(cfg, dts, args.jobs, cfg.out), "dt", cfg.out)


def cmd_sweep_n(args) -> int:
    cfg = resolve_config(args)
    return _report_table(sweep_n(cfg, args.Ns, args.jobs, cfg.out), "N", cfg.out)


def cmd_reproduce_table(args) -> int:
    cfg, dts = table_config(args.setup)
    if args.setup == "literal":
        log.warning("literal setup: c_s=5/2 is not a travelling-wave speed for gamma=0.5, "
                    "delta=0.9, so the errors do not converge; see --setup centred or surface")
    code = _report_table(sweep_dt(cfg, dts, args.jobs, args.out), "dt", args.out)
    print("\npublished (zeta L2, v1 L2, zeta Linf, v1 Linf):")
    for dt, row in zip((2.5e-2, 1.25e-2, 6.25e-3, 3.125e-3), PUBLISHED_ERRORS):
        print(f"{dt:10.4e} | " + "  ".join(f"{e:.4e}" for e in row))
    return code


def cmd_validate(args) -> int:
    todo = list(checks.QUICK_CHECKS)
    if args.full:
        todo += list(checks.slow_checks(args.jobs))
    ok = True
    for check in todo:
        result = check()
        print(result.line(), flush=True)
        ok &= result.passed
    return EXIT_OK if ok else EXIT_VALIDATION


COMMANDS = {
    "run": cmd_run,
    "sweep-dt": cmd_sweep_dt,
    "sweep-N": cmd_sweep_n,
    "reproduce-table": cmd_reproduce_table,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NonConvergenceError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
