"""Experiment drivers: fixed-sequence runs, convergence studies, adaptive
runs and long-time simulations."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..adaptive import AdaptConfig, adaptive_loop
from ..coefficients import THETA_MIDPOINT
from ..errors import InvalidArgument
from ..fem import FeSpace, error_norm, l2_norm
from ..model import ModelParams
from ..modified import ModifiedDLNStepper
from ..sav import SavParams, SavStepper, initial_auxiliary
from ..state import SavState, SchemeState
from .problems import Problem
from .steps import rate_table, step_sequence

SCHEMES = ("modified", "css_split", "sav")
NORMS = ("linf_l2", "l2_l2", "l2_h1")


def make_stepper(scheme: str, space: FeSpace, problem: Problem, theta: float, fp=None, c0: float = 0.0):
    bc = problem.boundary()
    if scheme in ("modified", "css_split"):
        params = ModelParams(problem.epsilon, problem.forcing)
        variant = "secant" if scheme == "modified" else "convex_split"
        return ModifiedDLNStepper(space, params, theta, bc, fp, variant)
    if scheme == "sav":
        return SavStepper(space, SavParams(problem.epsilon, c0, problem.forcing), theta, bc)
    raise InvalidArgument(f"unknown scheme {scheme!r}; choose from {SCHEMES}")


def bootstrap_state(stepper, problem: Problem, k0: float, u0: np.ndarray, policy: str = "exact", fp=None):
    """Two-level starting state (u_0, u_1) with u_1 at t = k0.

    ``exact`` interpolates the known solution; ``midpoint`` takes one
    implicit-midpoint step of the modified scheme from u_0.
    """
    space = stepper.space
    if policy == "exact":
        u1 = problem.exact_field(space, k0)
    elif policy == "midpoint":
        helper = ModifiedDLNStepper(
            space, ModelParams(problem.epsilon, problem.forcing), THETA_MIDPOINT, problem.boundary(), fp
        )
        seed_state = SchemeState(u0, u0, 0.0, -k0, k0)
        u1 = helper.step(seed_state, k0)[0].u_curr
    else:
        raise InvalidArgument(f"unknown bootstrap policy {policy!r}")
    if isinstance(stepper, SavStepper):
        c0 = stepper.params.c0
        return SavState(
            u1,
            u0,
            k0,
            0.0,
            k0,
            r_curr=initial_auxiliary(space, u1, c0),
            r_prev=initial_auxiliary(space, u0, c0),
        )
    return SchemeState(u1, u0, k0, 0.0, k0)


class ErrorTracker:
    """Per-node L2 / H1 errors and their discrete-in-time aggregates."""

    def __init__(self, space: FeSpace, problem: Problem):
        self.space = space
        self.problem = problem
        self.l2: list[float] = []
        self.h1: list[float] = []
        self.k: list[float] = []

    def add(self, u: np.ndarray, t: float, k: float):
        p = self.problem
        ex = lambda *x: p.exact(*x, t)  # noqa: E731
        gr = lambda *x: p.exact_grad(*x, t)  # noqa: E731
        self.l2.append(error_norm(self.space, u, ex, "L2"))
        self.h1.append(error_norm(self.space, u, ex, "H1", gr))
        self.k.append(k)

    def summary(self) -> dict:
        k = np.asarray(self.k)
        return {
            "linf_l2": float(np.max(self.l2)),
            "l2_l2": float(np.sqrt(np.sum(k * np.square(self.l2)))),
            "l2_h1": float(np.sqrt(np.sum(k * np.square(self.h1)))),
        }


@dataclass
class RunResult:
    errors: dict
    steps: int
    k_max: float
    rejections: int = 0
    energies: list = field(default_factory=list)
    times: list = field(default_factory=list)
    seconds: float = 0.0
    stats: object = None
    state: object = None


def run_fixed(
    problem: Problem,
    scheme: str,
    theta: float,
    n: int,
    steps: list[float],
    fp=None,
    c0: float = 0.0,
    bootstrap: str = "exact",
    seed: int | None = None,
    track_energy: bool = False,
    on_step: Optional[Callable] = None,
    space: FeSpace | None = None,
) -> RunResult:
    """Run a prescribed step sequence; the first step produces u_1 by the
    bootstrap policy, the rest are DLN steps."""
    t0 = time.perf_counter()
    space = problem.space(n) if space is None else space
    stepper = make_stepper(scheme, space, problem, theta, fp, c0)
    u0 = problem.initial_field(space, seed)
    state = bootstrap_state(stepper, problem, steps[0], u0, bootstrap, fp)
    tracker = ErrorTracker(space, problem) if problem.exact is not None else None
    if tracker:
        tracker.add(state.u_curr, state.t_curr, steps[0])
    energies, times = [], []
    if track_energy:
        energies.append(stepper.energy(state))
        times.append(state.t_curr)
    for k in steps[1:]:
        state, _ = stepper.step(state, k)
        if tracker:
            tracker.add(state.u_curr, state.t_curr, k)
        if track_energy:
            energies.append(stepper.energy(state))
            times.append(state.t_curr)
        if on_step is not None:
            on_step(state)
    return RunResult(
        errors=tracker.summary() if tracker else {},
        steps=len(steps),
        k_max=max(steps),
        energies=energies,
        times=times,
        seconds=time.perf_counter() - t0,
        state=state,
    )


def wave_cells_for_step(problem: Problem, k: float) -> int:
    """Mesh for temporal studies: h = k^2."""
    return max(1, int(round(problem.length / k**2)))


def temporal_study(
    problem: Problem,
    scheme: str,
    theta: float,
    ladder,
    policy: str = "constant",
    seed: int = 0,
    mesh_n: int | None = None,
    fp=None,
    c0: float = 0.0,
):
    """Errors over a k ladder.  Without ``mesh_n`` the mesh follows h = k^2
    (the regime in which the spatial error is negligible)."""
    rows, results = [], []
    for k in ladder:
        n = mesh_n if mesh_n is not None else wave_cells_for_step(problem, k)
        steps = step_sequence(policy, k, problem.t_final, seed)
        res = run_fixed(problem, scheme, theta, n, steps, fp, c0)
        rows.append((res.k_max, res.errors))
        results.append((k, res))
    return rate_table(rows), results


def spatial_study(
    problem: Problem,
    scheme: str,
    theta: float,
    h_ladder,
    k: float | None = None,
    fp=None,
    c0: float = 0.0,
):
    """Errors over an h ladder.  Without ``k`` the step follows k = h^2."""
    rows, results = [], []
    for h in h_ladder:
        n = int(round(problem.length / h))
        kk = h * h if k is None else k
        steps = step_sequence("constant", kk, problem.t_final)
        res = run_fixed(problem, scheme, theta, n, steps, fp, c0)
        rows.append((h, res.errors))
        results.append((kk, res))
    return rate_table(rows), results


def run_adaptive(
    problem: Problem,
    scheme: str,
    theta: float,
    n: int,
    cfg: AdaptConfig,
    fp=None,
    c0: float = 0.0,
    bootstrap: str = "exact",
    seed: int | None = None,
    stop: Optional[Callable] = None,
    on_accept: Optional[Callable] = None,
    space: FeSpace | None = None,
) -> RunResult:
    t0 = time.perf_counter()
    space = problem.space(n) if space is None else space
    stepper = make_stepper(scheme, space, problem, theta, fp, c0)
    u0 = problem.initial_field(space, seed)
    state = bootstrap_state(stepper, problem, cfg.k0, u0, bootstrap, fp)
    tracker = ErrorTracker(space, problem) if problem.exact is not None else None
    if tracker:
        tracker.add(state.u_curr, state.t_curr, cfg.k0)
    energies = [stepper.energy(state)]
    times = [state.t_curr]

    def record(s, rec):
        if tracker:
            tracker.add(s.u_curr, s.t_curr, rec.k)
        energies.append(rec.energy)
        times.append(s.t_curr)
        if on_accept is not None:
            on_accept(s, rec)

    state, stats = adaptive_loop(stepper, state, cfg, problem.t_final, on_accept=record, stop=stop)
    ks = [r.k for r in stats.records if r.accepted]
    return RunResult(
        errors=tracker.summary() if tracker else {},
        steps=stats.total_steps,
        k_max=max(ks + [cfg.k0]),
        rejections=stats.rejections,
        energies=energies,
        times=times,
        seconds=time.perf_counter() - t0,
        stats=stats,
        state=state,
    )


def steady_state_detector(space: FeSpace, threshold: float):
    """Stops when the discrete time derivative |u_n - u_{n-1}| / k drops
    below ``threshold`` (L2 norm)."""

    def stop(state) -> bool:
        return l2_norm(space, state.u_curr - state.u_prev) / state.k_prev < threshold

    return stop


def run_to_steady_state(
    problem: Problem,
    scheme: str,
    theta: float,
    n: int,
    k: float,
    threshold: float,
    seed: int | None = 0,
    fp=None,
    c0: float = 0.0,
    max_time: float | None = None,
    on_step: Optional[Callable] = None,
    space: FeSpace | None = None,
) -> RunResult:
    """Constant-step run from the random initial field until the steady-state
    detector fires (or ``max_time``)."""
    t0 = time.perf_counter()
    space = problem.space(n) if space is None else space
    stepper = make_stepper(scheme, space, problem, theta, fp, c0)
    u0 = problem.initial_field(space, seed)
    state = bootstrap_state(stepper, problem, k, u0, "midpoint", fp)
    stop = steady_state_detector(space, threshold)
    t_end = problem.t_final if max_time is None else max_time
    energies = [stepper.energy(state)]
    times = [state.t_curr]
    nsteps = 1
    while state.t_curr < t_end - 1e-12 and not stop(state):
        state, _ = stepper.step(state, k)
        nsteps += 1
        energies.append(stepper.energy(state))
        times.append(state.t_curr)
        if on_step is not None:
            on_step(state)
    return RunResult({}, nsteps, k, energies=energies, times=times, seconds=time.perf_counter() - t0, state=state)


def is_two_phase(space: FeSpace, u: np.ndarray, level: float = 0.9, min_fraction: float = 0.05) -> bool:
    """Both wells occupied: each phase covers at least ``min_fraction`` of the
    domain (measured through the mass matrix) at |u| >= level."""
    M = space.mass
    total = float(np.ones(space.n_dofs) @ (M @ np.ones(space.n_dofs)))
    plus = float((u >= level).astype(float) @ (M @ np.ones(space.n_dofs))) / total
    minus = float((u <= -level).astype(float) @ (M @ np.ones(space.n_dofs))) / total
    return plus >= min_fraction and minus >= min_fraction


def is_nonincreasing(values, slack: float = 0.0) -> bool:
    v = np.asarray(values)
    return bool(np.all(np.diff(v) <= slack))


__all__ = [
    "ErrorTracker",
    "NORMS",
    "RunResult",
    "SCHEMES",
    "bootstrap_state",
    "is_nonincreasing",
    "is_two_phase",
    "make_stepper",
    "run_adaptive",
    "run_fixed",
    "run_to_steady_state",
    "spatial_study",
    "steady_state_detector",
    "temporal_study",
    "wave_cells_for_step",
]
