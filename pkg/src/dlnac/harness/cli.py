"""Command-line driver.

Examples::

    dlnac converge-time --config configs/wave1d_time_modified.cfg --theta 1
    dlnac adapt --problem wave1d --scheme sav --mesh-n 600 --k 1e-3 --tol 1e-6
    dlnac simulate --problem random2d --mesh-n 48 --k 0.01 --steady-tol 1e-4
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import DlnError
from .config import COMMANDS, ExperimentConfig
from .experiments import run_experiment

log = logging.getLogger("dlnac")

# flag -> (config key, type, help)
_FLAGS = {
    "--problem": ("problem", str, "wave1d | manufactured2d | random2d"),
    "--scheme": ("scheme", str, "modified | css_split | sav"),
    "--theta": ("theta", str, "blending parameter: number, fraction, or dln / ks / midpoint"),
    "--epsilon": ("epsilon", float, "interface parameter (default: problem value)"),
    "--mesh-n": ("mesh_n", int, "cells per side"),
    "--t-final": ("t_final", float, "final time (default: problem value)"),
    "--policy": ("policy", str, "constant | random | alternating | adaptive"),
    "--k": ("k", float, "reference step, or the initial step of adaptive runs"),
    "--ladder": ("ladder", str, "comma-separated k (time) or h (space) values"),
    "--seed": ("seed", int, "seed for random steps and random initial data"),
    "--tol": ("tol", float, "adaptive LTE tolerance"),
    "--kappa": ("kappa", float, "controller safety factor"),
    "--k-min": ("k_min", float, "smallest adaptive step"),
    "--k-max": ("k_max", float, "largest adaptive step"),
    "--estimator": ("estimator", str, "absolute | relative"),
    "--floor-policy": ("floor_policy", str, "abort | accept at the step floor"),
    "--fp-tol": ("fp_tol", float, "fixed-point tolerance of the modified scheme"),
    "--fp-max-iter": ("fp_max_iter", int, "fixed-point iteration cap"),
    "--c0": ("c0", float, "SAV energy shift"),
    "--steady-tol": ("steady_tol", float, "steady-state threshold on |u_n - u_{n-1}|/k"),
    "--snapshots": ("snapshots", str, "comma-separated snapshot times (VTK, 2D only)"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dlnac", description="Variable-step DLN Allen-Cahn experiments")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="key = value configuration file")
        p.add_argument("--out", type=Path, help="output directory (default: out)")
        for flag, (dest, typ, text) in _FLAGS.items():
            p.add_argument(flag, dest=dest, type=typ, default=None, help=text)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {dest: getattr(args, dest) for dest, _, _ in _FLAGS.values()}
    if args.out is not None:
        overrides["out"] = str(args.out)
    if args.config is not None:
        return ExperimentConfig.from_file(args.config, overrides)
    return ExperimentConfig().updated(overrides)


def _print_report(report):
    s = report.summary
    if "rows" in s:
        head = f"{'k':>10} {'k_max':>10} {'h':>10} {'linf_L2':>10} {'rate':>6} {'l2_L2':>10} {'rate':>6} {'l2_H1':>10} {'rate':>6}"
        print(head)
        for r in s["rows"]:
            print(
                f"{r['k']:10.4g} {r['k_max']:10.4g} {r['h']:10.4g} "
                f"{r['err_linf_l2']:10.3e} {r['rate_linf_l2']:6.2f} "
                f"{r['err_l2_l2']:10.3e} {r['rate_l2_l2']:6.2f} "
                f"{r['err_l2_h1']:10.3e} {r['rate_l2_h1']:6.2f}"
            )
    else:
        for k, v in s.items():
            print(f"{k:>22}: {v}")
    for f in report.files:
        print(f"wrote {f}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        report = run_experiment(cfg, args.command, Path(cfg.out))
    except (DlnError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _print_report(report)
    return 0


if __name__ == "__main__":
    sys.exit(main())
