"""Command line entry point: ``harmonic-qrc run | baseline | summarize``."""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

import numpy as np

from .config import load_config
from .errors import QRCError
from .harness import median_table, run_experiment, summarize
from .network import OMEGA0
from .tasks import random_guess_baseline, state_sampler

BASELINE_TASKS = ("stqm", "qce")


def _run(args) -> int:
    config = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.realizations is not None:
        changes["realizations"] = args.realizations
    if args.out is not None:
        changes["out"] = args.out
    if changes:
        config = config.replace(**changes)
    if config.realizations < 1 or config.seed < 0:
        raise QRCError("realizations must be >= 1 and seed >= 0")
    record = run_experiment(config, threads=args.threads)
    print(f"config {record.config_hash}: {len(record.results)} results in {config.out}")
    _print_table(record)
    return 0


def _baseline(args) -> int:
    if args.task not in BASELINE_TASKS:
        raise QRCError(f"random-guess baseline is defined for {', '.join(BASELINE_TASKS)}, not {args.task!r}")
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    value = random_guess_baseline(rng, state_sampler(omega=args.omega0), samples=args.samples)
    print(f"{args.task} random-guess fidelity: {value:.6f} ({args.samples} samples)")
    return 0


def _summarize(args) -> int:
    axes = args.axes.split(";") if args.axes else None
    record, paths = summarize(args.record_dir, axes)
    for path in paths:
        print(path)
    _print_table(record)
    return 0


def _print_table(record) -> None:
    for point, count, median in median_table(record):
        label = " ".join(f"{k}={v}" for k, v in point.items()) or "all"
        print(f"  {label}: median {median:.6g} over {count}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="harmonic-qrc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a YAML or JSON config")
    run.add_argument("config")
    run.add_argument("--seed", type=int, help="master seed (overrides the config)")
    run.add_argument("--realizations", type=int, help="number of realizations (overrides the config)")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--threads", type=int, default=1, help="worker processes for realizations")
    run.set_defaults(func=_run)

    base = sub.add_parser("baseline", help="random-guess fidelity for a task's input distribution")
    base.add_argument("task")
    base.add_argument("--seed", type=int)
    base.add_argument("--samples", type=int, default=10_000)
    base.add_argument("--omega0", type=float, default=OMEGA0)
    base.set_defaults(func=_baseline)

    summ = sub.add_parser("summarize", help="regenerate plot data for a finished run")
    summ.add_argument("record_dir")
    summ.add_argument("--axes", help="';'-separated dimensions, e.g. 'tau' or 'N,M'")
    summ.set_defaults(func=_summarize)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except QRCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
