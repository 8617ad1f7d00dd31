"""Command-line entry point ``clampedplate``.

Exit codes: 0 all asserted checks hold, 1 a pipeline stage failed, 2 a
proven inequality is violated beyond the discretization band (or the solver
did not converge), 3 bad configuration.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import study
from .config import ConfigError, StudyConfig, load_config, parse_config

COMMANDS = {
    "solve": "smallest eigenpairs on the finest grid",
    "functionals": "first-eigenfunction functionals and the gap constant",
    "verify": "full pipeline: spectra, functionals, inequalities, trial checks",
    "trialfn": "trial-function identities and inequalities",
    "lemma21": "randomized sweep of the sequence bound",
    "oracle": "analytic beam/disk spectra and inequality suites",
    "converge": "Richardson convergence table over all divisions",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clampedplate", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", metavar="PATH", help="INI study configuration")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        solver = p.add_mutually_exclusive_group()
        solver.add_argument("--dense", dest="method", action="store_const", const="dense")
        solver.add_argument("--shift-invert", dest="method", action="store_const", const="shift-invert")
        p.add_argument("--tol", type=float, help="eigensolver tolerance")
    return parser


def _config(args) -> StudyConfig:
    cfg = load_config(args.config) if args.config else parse_config("")
    return cfg.with_overrides(seed=args.seed, method=args.method, tol=args.tol)


def _run(args, cfg: StudyConfig) -> study.StudyReport:
    cmd = args.command
    if cmd == "solve":
        return study.run_study(cfg, stages=("spectra",))
    if cmd == "functionals":
        return study.run_study(cfg, stages=("spectra", "functionals"))
    if cmd == "verify":
        return study.run_study(cfg)
    if cmd == "trialfn":
        return study.run_study(cfg, stages=("spectra", "trial"))
    if cmd == "lemma21":
        return study.run_lemma21(cfg)
    if cmd == "oracle":
        return study.run_oracle(cfg)
    return study.convergence_study(cfg)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        cfg = _config(args)
        report = _run(args, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return study.EXIT_CONFIG
    except study.StudyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return study.EXIT_FAILURE
    out = args.out or cfg.out_dir
    paths = study.emit_report(report, out)
    for p in paths:
        print(p)
    if report.violations:
        print("violations: " + ", ".join(report.violations), file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
