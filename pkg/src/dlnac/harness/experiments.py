"""Config-driven experiments and their file output (CSV, VTK, manifest)."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..adaptive import AdaptConfig, StepRecord
from ..errors import InvalidArgument
from ..fem import write_vtk
from ..modified import FixedPointConfig
from .config import ExperimentConfig, write_manifest
from .problems import get_problem
from .runners import (
    NORMS,
    is_nonincreasing,
    is_two_phase,
    run_adaptive,
    run_fixed,
    run_to_steady_state,
    spatial_study,
    steady_state_detector,
    temporal_study,
)
from .steps import step_sequence

log = logging.getLogger(__name__)

RATE_COLUMNS = (
    "scheme",
    "theta",
    "k",
    "k_max",
    *(f"err_{n}" for n in NORMS),
    *(f"rate_{n}" for n in NORMS),
    "steps",
    "rejections",
    "h",
)


@dataclass
class Report:
    command: str
    config: ExperimentConfig
    table: list = field(default_factory=list)
    runs: list = field(default_factory=list)
    records: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    times: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    files: list = field(default_factory=list)


def _problem(cfg: ExperimentConfig):
    return get_problem(cfg.problem, cfg.epsilon, cfg.t_final)


def _fp(cfg: ExperimentConfig) -> FixedPointConfig:
    return FixedPointConfig(tol=cfg.fp_tol, max_iter=cfg.fp_max_iter)


def _adapt_cfg(cfg: ExperimentConfig) -> AdaptConfig:
    return AdaptConfig(
        tol=cfg.tol,
        k_min=cfg.k_min,
        k_max=cfg.k_max,
        k0=cfg.k,
        kappa=cfg.kappa,
        estimator=cfg.estimator,
        max_rejections=cfg.max_rejections,
        floor_policy=cfg.floor_policy,
    )


def _rate_rows(cfg, table, runs, hs):
    rows = []
    for row, (k, res), h in zip(table, runs, hs):
        rows.append(
            {
                "scheme": cfg.scheme,
                "theta": cfg.theta,
                "k": k,
                "k_max": res.k_max,
                **{f"err_{n}": row.errors[n] for n in NORMS},
                **{f"rate_{n}": row.rates[n] for n in NORMS},
                "steps": res.steps,
                "rejections": res.rejections,
                "h": h,
            }
        )
    return rows


def _cell(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return v


def _write_csv(path: Path, columns, rows) -> Path:
    """``rows`` are dicts keyed by ``columns`` or plain sequences."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            values = [r[c] for c in columns] if isinstance(r, dict) else r
            w.writerow([_cell(v) for v in values])
    return path


def _stem(cfg: ExperimentConfig, command: str) -> str:
    return f"{cfg.problem}_{cfg.scheme}_theta{cfg.theta:.4f}_{command}"


# ------------------------------------------------------------------ studies
def convergence_study(cfg: ExperimentConfig, command: str) -> Report:
    cfg.validate(command)
    problem = _problem(cfg)
    report = Report(command, cfg)
    if command == "converge-time":
        table, runs = temporal_study(
            problem, cfg.scheme, cfg.theta, cfg.ladder, cfg.policy, cfg.seed, cfg.mesh_n, _fp(cfg), cfg.c0
        )
        hs = [
            problem.length / (cfg.mesh_n if cfg.mesh_n is not None else max(1, round(problem.length / k**2)))
            for k in cfg.ladder
        ]
    else:
        table, runs = spatial_study(problem, cfg.scheme, cfg.theta, cfg.ladder, cfg.k, _fp(cfg), cfg.c0)
        hs = list(cfg.ladder)
    report.table, report.runs = table, runs
    report.summary = {"rows": _rate_rows(cfg, table, runs, hs)}
    return report


def adaptive_run(cfg: ExperimentConfig, snapshot_dir: Path | None = None) -> Report:
    cfg.validate("adapt")
    problem = _problem(cfg)
    acfg = _adapt_cfg(cfg)
    report = Report("adapt", cfg)
    space = problem.space(cfg.mesh_n)
    stop = None
    if problem.exact is None and cfg.steady_tol is not None:
        stop = steady_state_detector(space, cfg.steady_tol)
    snap = _Snapshots(cfg.snapshots, snapshot_dir, _stem(cfg, "adapt"), space)
    res = run_adaptive(
        problem,
        cfg.scheme,
        cfg.theta,
        cfg.mesh_n,
        acfg,
        _fp(cfg),
        cfg.c0,
        bootstrap="exact" if problem.exact is not None else "midpoint",
        seed=cfg.seed,
        stop=stop,
        on_accept=lambda s, rec: snap(s),
        space=space,
    )
    snap.final(res.state)
    report.runs = [(cfg.k, res)]
    report.records = res.stats.records
    report.energies, report.times = res.energies, res.times
    report.files += snap.files
    s = res.stats
    report.summary = {
        "accepted": s.accepted,
        "rejections": s.rejections,
        "total_steps": s.total_steps,
        "warmup_steps": s.warmup_steps,
        "singular_events": s.singular_events,
        "convergence_failures": s.convergence_failures,
        "floor_accepts": s.floor_accepts,
        "stopped_early": s.stopped_early,
        "t_end": res.state.t_curr,
        "energy_nonincreasing": is_nonincreasing(res.energies, 1e-10 * max(1.0, abs(res.energies[0]))),
        "seconds": res.seconds,
        **{f"err_{k}": v for k, v in res.errors.items()},
    }
    if problem.exact is None:
        report.summary["two_phase"] = is_two_phase(space, res.state.u_curr)
    return report


def simulation(cfg: ExperimentConfig, snapshot_dir: Path | None = None) -> Report:
    cfg.validate("simulate")
    problem = _problem(cfg)
    report = Report("simulate", cfg)
    space = problem.space(cfg.mesh_n)
    snap = _Snapshots(cfg.snapshots, snapshot_dir, _stem(cfg, "simulate"), space)
    if problem.exact is None:
        if cfg.policy != "constant":
            raise InvalidArgument("random-initial-data simulations use constant steps (or 'adapt')")
        threshold = 0.0 if cfg.steady_tol is None else cfg.steady_tol
        res = run_to_steady_state(
            problem, cfg.scheme, cfg.theta, cfg.mesh_n, cfg.k, threshold, cfg.seed, _fp(cfg), cfg.c0,
            on_step=snap, space=space,
        )
    else:
        steps = step_sequence(cfg.policy, cfg.k, problem.t_final, cfg.seed)
        res = run_fixed(
            problem, cfg.scheme, cfg.theta, cfg.mesh_n, steps, _fp(cfg), cfg.c0, track_energy=True,
            on_step=snap, space=space,
        )
    snap.final(res.state)
    report.runs = [(cfg.k, res)]
    report.energies, report.times = res.energies, res.times
    report.files += snap.files
    report.summary = {
        "steps": res.steps,
        "t_end": res.state.t_curr,
        "energy_nonincreasing": is_nonincreasing(res.energies, 1e-10 * max(1.0, abs(res.energies[0]))),
        "seconds": res.seconds,
        **{f"err_{k}": v for k, v in res.errors.items()},
    }
    if problem.exact is None:
        report.summary["two_phase"] = is_two_phase(space, res.state.u_curr)
    return report


class _Snapshots:
    """Writes a VTK file the first time the run passes each requested time."""

    def __init__(self, times, directory, stem, space):
        self.pending = sorted(times)
        self.directory = None if directory is None else Path(directory)
        self.stem = stem
        self.space = space
        self.files: list[Path] = []

    def _write(self, state, tag):
        if self.directory is None or self.space.dim != 2:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / f"{self.stem}_{tag}.vtk"
        write_vtk(path, self.space, {"u": state.u_curr}, title=f"t={state.t_curr:.6g}")
        self.files.append(path)

    def __call__(self, state):
        while self.pending and state.t_curr >= self.pending[0] - 1e-12:
            self._write(state, f"t{self.pending.pop(0):g}")

    def final(self, state):
        self._write(state, "final")


# ------------------------------------------------------------------ entry points
def run_wave1d(cfg: ExperimentConfig, command: str = "converge-time", out: Path | None = None) -> Report:
    if cfg.problem != "wave1d":
        raise InvalidArgument("run_wave1d needs problem = wave1d")
    return run_experiment(cfg, command, out)


def run_manufactured2d(cfg: ExperimentConfig, command: str = "converge-time", out: Path | None = None) -> Report:
    if cfg.problem != "manufactured2d":
        raise InvalidArgument("run_manufactured2d needs problem = manufactured2d")
    return run_experiment(cfg, command, out)


def run_random2d(cfg: ExperimentConfig, command: str = "adapt", out: Path | None = None) -> Report:
    if cfg.problem != "random2d":
        raise InvalidArgument("run_random2d needs problem = random2d")
    return run_experiment(cfg, command, out)


def run_experiment(cfg: ExperimentConfig, command: str, out: Path | None = None) -> Report:
    """Run ``command`` and, when ``out`` is given, write its CSV output, VTK
    snapshots and the run manifest there."""
    out = None if out is None else Path(out)
    if command in ("converge-time", "converge-space"):
        report = convergence_study(cfg, command)
    elif command == "adapt":
        report = adaptive_run(cfg, out)
    elif command == "simulate":
        report = simulation(cfg, out)
    else:
        raise InvalidArgument(f"unknown command {command!r}")
    if out is not None:
        stem = _stem(cfg, command)
        if report.table:
            report.files.append(_write_csv(out / f"{stem}.csv", RATE_COLUMNS, report.summary["rows"]))
        if report.records:
            report.files.append(
                _write_csv(out / f"{stem}_steps.csv", StepRecord.FIELDS, [r.row() for r in report.records])
            )
        if report.energies:
            report.files.append(
                _write_csv(out / f"{stem}_energy.csv", ("t", "energy"), list(zip(report.times, report.energies)))
            )
        extra = {k: v for k, v in report.summary.items() if k != "rows"}
        report.files.append(write_manifest(out / f"{stem}_manifest.txt", cfg, command, extra))
    return report


__all__ = [
    "RATE_COLUMNS",
    "Report",
    "adaptive_run",
    "convergence_study",
    "run_experiment",
    "run_manufactured2d",
    "run_random2d",
    "run_wave1d",
    "simulation",
]
