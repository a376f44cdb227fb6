"""Command-line entry point: ``simulate --preset fig2 --trials 100 --seed 42 --out results.csv``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import parse_assignments, read_config_file
from .harness import PRESETS, ExperimentSpec, run_experiment


def build_parser():
    p = argparse.ArgumentParser(
        prog="simulate",
        description="Cell-free massive MIMO with limited backhaul: run an experiment preset.",
    )
    p.add_argument("--preset", choices=PRESETS, default="custom")
    p.add_argument("--trials", type=int, default=100, help="topology drops (default 100)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results.csv", help="CSV path; summary goes to <out>.summary.json")
    p.add_argument("--config", help="key = value parameter file")
    p.add_argument("--set", dest="assignments", action="append", default=[], metavar="KEY=VALUE",
                   help="override a parameter (repeatable; wins over --config)")
    p.add_argument("--variant", dest="variants", action="append", metavar="NAME",
                   help="run only this experiment of the preset (repeatable)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        overrides = read_config_file(args.config) if args.config else {}
        overrides.update(parse_assignments(args.assignments))
        spec = ExperimentSpec(preset=args.preset, overrides=overrides, trials=args.trials,
                              seed=args.seed, out=args.out, workers=args.workers,
                              variants=tuple(args.variants) if args.variants else None)
        _, summary = run_experiment(spec)
    except (KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"simulate: error: {msg}", file=sys.stderr)
        return 2
    json.dump(summary, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
