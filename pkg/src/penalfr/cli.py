"""Command-line front end: ``penalfr eigen|advect|ns2d|repro``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
import argparse
import logging
import os
import sys

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "NUMBA_NUM_THREADS")


def _parser():
    p = argparse.ArgumentParser(prog="penalfr", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=None, help="BLAS/numba thread count (default: library choice)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eigen", help="semi- or fully-discrete eigenanalysis of the 1D model")
    e.add_argument("kind", choices=("semi", "full"))
    e.add_argument("--config", required=True)
    e.add_argument("--out", default=None)

    a = sub.add_parser("advect", help="penalized 1D advection run or parameter sweep")
    a.add_argument("--config", required=True)
    a.add_argument("--sweep", default=None, help="YAML file with eta/chi_f/sfd_delta lists")
    a.add_argument("--out", default=None)

    n = sub.add_parser("ns2d", help="2D Navier-Stokes run")
    n.add_argument("--config", required=True)
    n.add_argument("--out", default=None)
    n.add_argument("--resume", default=None, metavar="CHECKPOINT")

    r = sub.add_parser("repro", help="regenerate the data behind a figure or table")
    r.add_argument("figure", help="one of: fig3 fig4 fig5 fig6 fig7 fig8 naca cylinder table1")
    r.add_argument("--out", default=None)
    r.add_argument("--quick", action="store_true", help="reduced grids / short runs for a plumbing check")
    return p


def _set_threads(n):
    if n is None:
        return
    if n < 1:
        raise ValueError("--threads must be >= 1")
    for var in THREAD_VARS:
        os.environ[var] = str(n)


def _mode_check(cfg, expected):
    from .config import ConfigError

    if cfg.mode != expected:
        raise ConfigError(f"config is for mode '{cfg.mode}' but the command runs '{expected}'", "mode")


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _set_threads(args.threads)
    except ValueError as exc:
        print(f"penalfr: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    # numerics are imported only after the thread variables are set
    from .advect1d import NumericalInstability
    from .config import ConfigError, load_config, parse_sweep
    from .io import CheckpointError
    from .ns2d.gas import PositivityError
    from .ns2d.simulation import NumericalFailure
    from . import runners

    try:
        if args.command == "repro":
            from .repro import run_repro

            run_repro(args.figure, args.out or os.path.join("repro_out", args.figure), quick=args.quick)
            return EXIT_OK
        cfg = load_config(args.config)
        out = args.out or cfg.output_dir
        if args.command == "eigen":
            _mode_check(cfg, f"eigen-{args.kind}")
            runners.prepare_output(cfg, out)
            runners.run_eigen(cfg, out, args.kind)
        elif args.command == "advect":
            _mode_check(cfg, "advect")
            sweep = None
            if args.sweep:
                with open(args.sweep, encoding="utf-8") as fh:
                    sweep = parse_sweep(fh.read())
            runners.prepare_output(cfg, out)
            runners.run_advect(cfg, out, sweep)
        elif args.command == "ns2d":
            _mode_check(cfg, "ns2d")
            runners.prepare_output(cfg, out)
            runners.run_ns2d(cfg, out, resume=args.resume)
    except (ConfigError, CheckpointError, FileNotFoundError, KeyError) as exc:
        print(f"penalfr: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalInstability, NumericalFailure, PositivityError, FloatingPointError) as exc:
        print(f"penalfr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
