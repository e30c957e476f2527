"""Command-line experiment driver.

    starsim state-dist --cell qlc --out results
    starsim lifetime --config lifetime.json --seed 7
    starsim replay trace.csv --cell tlc --mode star

Settings come from defaults, then ``--config``, then ``STARSIM_<FIELD>``
environment variables, then flags.  Failures print a JSON object on stderr
and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import ConfigError, StarSimError
from .experiments import EXPERIMENTS, load_experiment_config, run_experiment

EXIT_ERROR = 2
EXIT_IO = 3


def _common(parser):
    g = parser.add_argument_group("common options")
    g.add_argument("--config", help="JSON experiment config")
    g.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    g.add_argument("--out", help="output directory")
    g.add_argument("--mode", choices=("baseline", "tailcut", "star"),
                   help="compare only this mode against baseline")
    g.add_argument("--cell", dest="cell_type", choices=("tlc", "qlc"))
    g.add_argument("--profile", help="error profile JSON (default: shipped profile)")
    g.add_argument("--blocks", dest="n_blocks", type=int, help="sampled blocks per mode")


def build_parser():
    parser = argparse.ArgumentParser(prog="starsim", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"starsim {__version__}")
    sub = parser.add_subparsers(dest="experiment", metavar="command", required=True)
    helps = {
        "state-dist": "per-state populations after each write path",
        "weak-patterns": "top weak-pattern occurrences per mode",
        "lifetime": "end-of-life PEC per mode",
        "latency": "mean read latency on the synthetic workloads",
        "retry": "mean read retries per condition",
        "pipeline": "datapath latency and throughput",
        "calibrate": "fit a profile to targets",
        "replay": "replay a trace CSV",
    }
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=helps[name])
        _common(p)
        if name == "replay":
            p.add_argument("trace", help="CSV with timestamp_us,op,lba,size_bytes")
        if name == "calibrate":
            p.add_argument("--targets", help="JSON file with calibration targets")
    return parser


def _error(exc, code):
    payload = {"error": getattr(exc, "code", type(exc).__name__), "message": str(exc)}
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "targets")}
    try:
        if getattr(args, "targets", None):
            try:
                with open(args.targets) as fh:
                    overrides["targets"] = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"targets file: {exc}") from None
        cfg = load_experiment_config(args.config, overrides)
        paths, _ = run_experiment(cfg)
    except StarSimError as exc:
        return _error(exc, EXIT_ERROR)
    except OSError as exc:
        return _error(exc, EXIT_IO)
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
