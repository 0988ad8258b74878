"""Command-line entry point: ``dampedwave run|validate|defaults|list-experiments``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .config import EXPERIMENTS, ConfigError, default_text, load_config, validate
from .runner import run_experiment, write_outcome

EXIT_OK = 0
EXIT_CHECK_FAILED = 2
EXIT_BAD_CONFIG = 3
EXIT_ABORTED = 4
EXIT_IO = 5

log = logging.getLogger("dampedwave")


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, args.output)
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_BAD_CONFIG
    problems = validate(cfg)
    if problems:
        for p in problems:
            log.error("invalid config: %s", p)
        return EXIT_BAD_CONFIG
    try:
        with np.errstate(over="raise", invalid="raise"):
            outcome = run_experiment(cfg)
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        log.error("aborted: %s: %s", type(exc).__name__, exc)
        return EXIT_ABORTED
    try:
        summary = write_outcome(cfg, outcome)
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO
    for c in summary["checks"]:
        mark = "PASS" if c["passed"] else "FAIL"
        if "target" in c:
            rule = f"within {c['tolerance']:.6g} of {c['target']:.6g}"
        else:
            rule = f"{c['relation']} {c['tolerance']:.6g}"
        print(f"{mark}  {c['name']}: measured {c['measured']:.6g} ({rule})")
    print(f"results in {cfg.output}")
    return EXIT_OK if summary["passed"] else EXIT_CHECK_FAILED


def _cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(json.dumps({"accepted": False, "problems": [str(exc)]}, indent=2))
        return EXIT_BAD_CONFIG
    problems = validate(cfg)
    print(json.dumps({"experiment": cfg.name, "accepted": not problems, "problems": problems}, indent=2))
    return EXIT_OK if not problems else EXIT_BAD_CONFIG


def _cmd_defaults(args) -> int:
    names = [args.experiment] if args.experiment else list(EXPERIMENTS)
    for name in names:
        if name not in EXPERIMENTS:
            log.error("unknown experiment %r", name)
            return EXIT_BAD_CONFIG
    for i, name in enumerate(names):
        if len(names) > 1:
            print(f"{'' if i == 0 else chr(10)}# ---- {name} ----")
        sys.stdout.write(default_text(name))
    return EXIT_OK


def _cmd_list(args) -> int:
    width = max(map(len, EXPERIMENTS))
    for name, desc in EXPERIMENTS.items():
        print(f"{name:<{width}}  {desc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dampedwave", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one experiment from an INI config")
    p.add_argument("config")
    p.add_argument("-o", "--output", help="override [experiment] output")
    p.set_defaults(func=_cmd_run)
    p = sub.add_parser("validate", help="static checks on a config, no computation")
    p.add_argument("config")
    p.set_defaults(func=_cmd_validate)
    p = sub.add_parser("defaults", help="print the built-in configuration(s)")
    p.add_argument("experiment", nargs="?")
    p.set_defaults(func=_cmd_defaults)
    p = sub.add_parser("list-experiments", help="names and one-line descriptions")
    p.set_defaults(func=_cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
