"""Command-line entry point.

Subcommands map to pipeline stages (ingest, betas, tvp, tests, pricing,
all) plus ``simulate`` for generating synthetic input files. Configuration
comes from an optional ``key=value`` file via ``--config``; every config
key has a same-named flag that overrides the file. ``--out`` names the
output directory and falls back to the BANKBETA_OUT environment variable
only when the flag is absent.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
error.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import ConfigError, DataError, NumericalError
from .pipeline import PipelineConfig, run_pipeline
from .simulation import generate_fixture_files

_OUT_ENV = "BANKBETA_OUT"

_OVERRIDE_KEYS = (
    "call_report",
    "rates",
    "market",
    "weighting",
    "rate_sampling",
    "burn_in",
    "granger_lags",
    "optimizer_starts",
    "seed",
    "market_cap_base",
    "beta_fig_ymin",
    "beta_fig_ymax",
)


def _add_run_parser(subparsers, name: str, help_text: str) -> None:
    p = subparsers.add_parser(name, help=help_text)
    p.add_argument("--config", metavar="FILE", help="key=value configuration file")
    p.add_argument("--out", metavar="DIR", help=f"output directory (or ${_OUT_ENV})")
    p.add_argument("--call-report", dest="call_report", metavar="PATH")
    p.add_argument("--rates", metavar="PATH")
    p.add_argument("--market", metavar="PATH")
    p.add_argument("--weighting", choices=("equal", "asset"))
    p.add_argument("--rate-sampling", dest="rate_sampling", choices=("last", "mean"))
    p.add_argument("--burn-in", dest="burn_in", type=int, metavar="N")
    p.add_argument("--granger-lags", dest="granger_lags", type=int, metavar="N")
    p.add_argument("--optimizer-starts", dest="optimizer_starts", type=int, metavar="N")
    p.add_argument("--seed", type=int, metavar="N")
    p.add_argument("--market-cap-base", dest="market_cap_base", type=float, metavar="X")
    p.add_argument("--beta-fig-ymin", dest="beta_fig_ymin", type=float, metavar="X")
    p.add_argument("--beta-fig-ymax", dest="beta_fig_ymax", type=float, metavar="X")
    p.add_argument(
        "--full-precision",
        dest="full_precision",
        action="store_const",
        const="true",
        help="also write *.full.csv sidecars with full float precision",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bankbeta",
        description="Batch pipeline for rate-sensitivity estimation on bank panel data.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    _add_run_parser(subparsers, "ingest", "parse inputs and emit the decile panel")
    _add_run_parser(subparsers, "betas", "constant-coefficient beta table")
    _add_run_parser(subparsers, "tvp", "time-varying betas and volatility tables")
    _add_run_parser(subparsers, "tests", "stability, causality, and unit-root tables")
    _add_run_parser(subparsers, "pricing", "uncertainty pricing regression and effect size")
    _add_run_parser(subparsers, "all", "everything, plus figures")

    sim = subparsers.add_parser("simulate", help="write synthetic input files")
    sim.add_argument("--out", metavar="DIR", help=f"output directory (or ${_OUT_ENV})")
    sim.add_argument("--seed", type=int, default=0, metavar="N")
    sim.add_argument("--banks", type=int, default=30, metavar="N")
    sim.add_argument("--quarters", type=int, default=48, metavar="N")
    return parser


def _resolve_out(args: argparse.Namespace) -> str:
    if args.out:
        return args.out
    env = os.environ.get(_OUT_ENV)
    if env:
        return env
    raise ConfigError(f"--out is required (or set ${_OUT_ENV})")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        out_dir = _resolve_out(args)
        if args.subcommand == "simulate":
            paths = generate_fixture_files(
                out_dir, seed=args.seed, n_banks=args.banks, n_quarters=args.quarters
            )
            conf = paths["call_report"].parent / "pipeline.conf"
            conf.write_text(
                f"call_report={paths['call_report']}\n"
                f"rates={paths['rates']}\n"
                f"market={paths['market']}\n"
            )
            for name in ("call_report", "rates", "market"):
                print(f"wrote {paths[name]}")
            print(f"wrote {conf}")
            return 0

        overrides = {
            key: str(getattr(args, key))
            for key in _OVERRIDE_KEYS
            if getattr(args, key) is not None
        }
        if args.full_precision is not None:
            overrides["full_precision"] = args.full_precision
        config = PipelineConfig.from_sources(
            out_dir=out_dir, config_file=args.config, overrides=overrides
        )
        manifest = run_pipeline(config, subcommand=args.subcommand)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4

    for warning in manifest.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"wrote {len(manifest.output_digests)} outputs and manifest.json to {out_dir}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
