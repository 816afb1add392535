"""Command line entry point: ``covad run``, ``covad sweep`` and ``covad check-theory``.

Exit codes: 0 success, 1 configuration error, 2 runtime fault.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from . import harness
from .io import load_config, parse_solver_list
from .lifted import TheoremParams, theory_report
from .model import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="covad", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="scenario/solver config file")
        sp.add_argument("--seed", type=_u64, default=0, help="master seed")
        sp.add_argument("--trials", type=int, help="overrides [run] trials")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--solvers", help="comma list from ml,mmv,nnls")
        sp.add_argument("--workers", type=int, default=1, help="parallel trial workers")
        sp.add_argument("--per-trial-pilots", action="store_true",
                        help="draw fresh pilots in every trial")

    common(sub.add_parser("run", help="Monte Carlo run of one scenario"))
    sw = sub.add_parser("sweep", help="repeat a run over values of one parameter")
    common(sw)
    sw.add_argument("--param", required=True, choices=harness.SWEEPABLE)
    sw.add_argument("--values", required=True, help="comma separated values")

    th = sub.add_parser("check-theory", help="evaluate the NNLS sampling condition and constants")
    th.add_argument("--D-c", dest="D_c", type=int, required=True)
    th.add_argument("--K-c", dest="K_c", type=int, required=True)
    th.add_argument("--s", type=int, required=True, help="sparsity order")
    th.add_argument("--delta", type=float, default=0.5)
    th.add_argument("--c-prime", dest="c_prime", type=float, default=1.0)
    th.add_argument("--lambda", dest="lambda_const", type=float, default=1.0)
    return p


def _prepare(args):
    rc = load_config(args.config)
    if args.trials is not None:
        if args.trials < 1:
            raise ConfigError("--trials must be >= 1")
        rc.trials = args.trials
    if args.solvers:
        rc.solvers = parse_solver_list(args.solvers)
    if args.per_trial_pilots:
        rc.fixed_pilots = False
    return rc


def _print_record(rec):
    tag = f"[{rec.label}] " if rec.label else ""
    for kind, roc in rec.roc.items():
        print(f"{tag}{kind}: p_D(p_FA=1e-2)={roc.pd_at_pfa(1e-2):.4f} "
              f"l2_err_median={rec.errors[kind]['error_l2_median']:.4g}")
    if rec.flagged_trials:
        print(f"{tag}flagged trials: {rec.flagged_trials}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "check-theory":
            params = TheoremParams(args.delta, args.c_prime, args.s, args.lambda_const)
            for line in theory_report(args.D_c, args.K_c, args.s, params):
                print(line)
            return EXIT_OK

        rc = _prepare(args)
        kw = dict(fixed_pilots=rc.fixed_pilots, nu_grid=rc.nu_grid, workers=args.workers)
        solvers = rc.solver_options()
        if args.command == "run":
            rec = harness.run_scenario(rc.scenario, solvers, rc.trials, args.seed, **kw)
            harness.emit_results(rec, args.out)
            _print_record(rec)
        else:
            values = [v.strip() for v in args.values.split(",") if v.strip()]
            conv = float if args.param == "snr_db" else int
            try:
                values = [conv(v) for v in values]
            except ValueError:
                raise ConfigError(f"bad --values for {args.param}: {args.values!r}") from None
            records = harness.sweep_parameter(rc.scenario, args.param, values, solvers,
                                              rc.trials, args.seed, **kw)
            for rec in records:
                harness.emit_results(rec, os.path.join(args.out, rec.label.replace("=", "_")))
                _print_record(rec)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - any fault maps to the runtime exit code
        print(f"runtime fault: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
