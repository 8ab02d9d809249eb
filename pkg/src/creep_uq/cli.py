"""Command-line entry point.

    creep-uq run        --config pipeline.ini [--out DIR] [--seed N]
                        [--threads N] [--repair-covariance]
    creep-uq fit        --config pipeline.ini ...
    creep-uq sensitivity --config pipeline.ini ...
    creep-uq propagate  --config pipeline.ini ...
    creep-uq select     --config pipeline.ini ...

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric or
stage error. Staged subcommands consume the previous stage's files from the
output directory; ``run`` executes all stages.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .exceptions import ConfigError, CreepUqError, DataError
from .pipeline import (StageError, load_config, run_pipeline, stage_fit,
                       stage_propagate, stage_select, stage_sensitivity)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4

_STAGES = {
    "run": run_pipeline,
    "fit": stage_fit,
    "sensitivity": stage_sensitivity,
    "propagate": stage_propagate,
    "select": stage_select,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="creep-uq",
        description="Probabilistic creep remaining-useful-life pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, help_text in (
            ("run", "execute the full pipeline"),
            ("fit", "fit the three creep laws"),
            ("sensitivity", "Sobol analysis and Gaussian parameter model"),
            ("propagate", "Monte Carlo rupture-time ensembles"),
            ("select", "AIC/BIC model ranking")):
        cmd = sub.add_parser(command, help=help_text)
        cmd.add_argument("--config", required=True, help="pipeline config file (INI)")
        cmd.add_argument("--out", help="output directory (overrides [output] dir)")
        cmd.add_argument("--seed", type=int,
                         help="master seed; per-stage seeds are derived from it")
        cmd.add_argument("--threads", type=int,
                         help="worker threads for parallel sections")
        cmd.add_argument("--repair-covariance", action="store_true",
                         help="project an indefinite covariance onto the PSD cone")
    return parser


def _classify(exc: Exception) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, DataError):
        return EXIT_DATA
    return EXIT_NUMERIC


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    overrides = {
        "output_dir": args.out,
        "seed": args.seed,
        "threads": args.threads,
        "repair_covariance": args.repair_covariance,
    }
    try:
        config = load_config(args.config, overrides)
    except CreepUqError as exc:
        print(f"creep-uq: config: {exc}", file=sys.stderr)
        return _classify(exc)
    if config.entropy_seed is not None:
        print(f"seed = {config.entropy_seed} (drawn from system entropy; "
              f"pass --seed {config.entropy_seed} to reproduce)")

    try:
        result = _STAGES[args.command](config)
    except StageError as exc:
        print(f"creep-uq: {exc}", file=sys.stderr)
        return _classify(exc.cause)
    except CreepUqError as exc:
        print(f"creep-uq: {exc}", file=sys.stderr)
        return _classify(exc)
    selected = result.get("selected")
    if selected is not None:
        print(f"selected model: {selected.value}")
    print(f"outputs in {config.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
