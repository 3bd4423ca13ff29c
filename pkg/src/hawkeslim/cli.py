"""Command-line front end for the experiment runner.

Five subcommands drive the library from a single JSON configuration:

``simulate``
    Event-stream paths over the horizon ladder, written as CSVs.
``limit``
    The matched limit-model ensemble plus its mapped parameters.
``verify``
    The full verification experiment and its pass/fail report.
``ml-eval``
    Special-function tables and identity residuals (no config needed).
``estimate``
    One estimator applied to existing CSV data files.

Every run writes a manifest; ``--master-seed`` and ``--outdir`` override
the corresponding top-level config fields, and ``--workers`` sizes the
process pool.  The exit status is 0 exactly when the command's configured
checks pass (for commands without checks: when the run completes).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .experiment import (
    ConfigError,
    ExperimentConfig,
    run_estimate,
    run_limit,
    run_ml_eval,
    run_simulate,
    run_verify,
)

__all__ = ["build_parser", "main"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hawkeslim",
        description=(
            "Simulate near-critical two-sided event-stream price models, "
            "their scaling limits, and the statistics connecting the two."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_command(name: str, help_text: str) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="experiment JSON file")
        cmd.add_argument(
            "--outdir", default=None, help="override the configured output directory"
        )
        cmd.add_argument(
            "--master-seed",
            type=int,
            default=None,
            help="override the configured master seed",
        )
        cmd.add_argument(
            "--workers",
            type=int,
            default=1,
            help="process-pool size (1 = run serially)",
        )
        return cmd

    add_config_command("simulate", "simulate event-stream paths over the horizon ladder")
    add_config_command("limit", "simulate the matched limit-model ensemble")
    add_config_command("verify", "run the verification experiment and report")

    ml = sub.add_parser("ml-eval", help="tabulate heavy-tail special functions")
    ml.add_argument("--alpha", type=float, required=True, help="tail index in (0, 1)")
    ml.add_argument("--rate", type=float, default=1.0, help="rate parameter")
    ml.add_argument("--t-max", type=float, default=2.0, help="table endpoint")
    ml.add_argument("--n", type=int, default=201, help="number of table points")
    ml.add_argument("--outdir", default="ml-eval", help="output directory")

    est = sub.add_parser("estimate", help="run one estimator on existing CSV data")
    est.add_argument(
        "--kind",
        required=True,
        choices=["realized-variance", "leverage", "qcov", "hurst", "ks"],
        help="estimator to run",
    )
    est.add_argument("--input", required=True, help="primary input CSV")
    est.add_argument(
        "--input-b", default=None, help="second input CSV (qcov and ks)"
    )
    est.add_argument(
        "--window", type=float, default=None, help="window length (time units)"
    )
    est.add_argument(
        "--burn-in",
        type=float,
        default=0.5,
        help="leading path fraction discarded by the roughness estimator",
    )
    est.add_argument("--outdir", required=True, help="output directory")
    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config)
    if args.outdir is not None:
        config = replace(config, outdir=args.outdir)
    if args.master_seed is not None:
        config = replace(config, master_seed=args.master_seed)
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            config = _load_config(args)
            manifest = run_simulate(config, workers=args.workers)
            print(f"simulate: {len(manifest.files)} files -> {config.outdir}")
            return 0
        if args.command == "limit":
            config = _load_config(args)
            manifest = run_limit(config, workers=args.workers)
            print(f"limit: {len(manifest.files)} files -> {config.outdir}")
            return 0
        if args.command == "verify":
            config = _load_config(args)
            _, report = run_verify(config, workers=args.workers)
            with open(f"{config.outdir}/report.txt", "r", encoding="utf-8") as fh:
                print(fh.read(), end="")
            return 0 if report["passed"] else 1
        if args.command == "ml-eval":
            report = run_ml_eval(
                args.alpha,
                rate=args.rate,
                t_max=args.t_max,
                n_points=args.n,
                outdir=args.outdir,
            )
            print(
                f"ml-eval: max transform residual "
                f"{report['max_laplace_residual']:.3e} "
                f"({'PASS' if report['passed'] else 'FAIL'})"
            )
            return 0 if report["passed"] else 1
        if args.command == "estimate":
            record = run_estimate(
                args.kind,
                args.input,
                args.outdir,
                input_b=args.input_b,
                window=args.window,
                burn_in=args.burn_in,
            )
            print(
                f"estimate[{args.kind}]: point={record['point']:.6g} "
                f"stderr={record['stderr']:.3g} n={record['n']}"
            )
            return 0
        raise AssertionError(f"unhandled command {args.command!r}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
