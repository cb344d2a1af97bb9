"""Command line entry point: ``deltales --config run.yaml [--workers N] [--seed S] [--output-dir D]``.

Exit codes: 0 ok, 1 numerical failure, 2 config error. Failures print a JSON
object {"error": kind, "message": ...} on stderr and, when the output
directory is writable, also write it to error.json there.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .domain import ConvergenceError
from .experiments import ConfigError, ExperimentConfig, load_config, run_experiment
from .greens import DomainError
from .kmatrix import SingularMatrixError
from .oracles import GridConvergenceError
from .spectra import OrientationError
from .stats import InsufficientDataError, PairingError, TilingError

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 1, 2

NUMERICAL_ERRORS = (ConvergenceError, SingularMatrixError, OrientationError, InsufficientDataError,
                    GridConvergenceError, np.linalg.LinAlgError, FloatingPointError, ArithmeticError)
CONFIG_ERRORS = (ConfigError, DomainError, TilingError, PairingError)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="deltales", description="Run a point-interaction spectral experiment.")
    p.add_argument("--config", required=True, help="JSON or YAML experiment config")
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: config or 1)")
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.add_argument("--output-dir", default=None, help="override output_dir")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _fail(code: int, kind: str, msg: str, out_dir: str | None):
    payload = {"error": kind, "message": msg, "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)
    if out_dir:
        try:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            (Path(out_dir) / "error.json").write_text(json.dumps(payload) + "\n")
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out_dir = args.output_dir
    try:
        cfg = load_config(args.config)
        overrides = {}
        if args.workers is not None:
            if args.workers < 1:
                raise ConfigError("--workers must be >= 1")
            overrides["workers"] = args.workers
        if args.seed is not None:
            overrides["master_seed"] = args.seed
        if out_dir is not None:
            overrides["output_dir"] = out_dir
        cfg = dataclasses.replace(cfg, **overrides)
        cfg.validate()
        out_dir = cfg.output_dir
    except CONFIG_ERRORS as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc), out_dir)
    try:
        summary = run_experiment(cfg)
    except CONFIG_ERRORS as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc), out_dir)
    except NUMERICAL_ERRORS as exc:
        return _fail(EXIT_NUMERICAL, type(exc).__name__, str(exc), out_dir)
    print(json.dumps({"experiment": cfg.experiment, "output_dir": cfg.output_dir,
                      "wall_time_s": round(summary["wall_time_s"], 3)}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
