"""Local-truncation-error driven step adaptivity.

The estimate compares the implicit DLN solution with an explicit two-slope
prediction built from the last four accepted solutions; the difference,
scaled by the ratio of the two methods' error constants, drives a standard
cube-root controller.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .coefficients import RATIO_BOUNDS, DlnCoefficients, combine, dln_coefficients
from .errors import ConvergenceFailure, InvalidArgument, NotReady, StepFloorError, TooManyRejections

log = logging.getLogger(__name__)

GROWTH_MAX = 1.5
SHRINK_MIN = 0.2
SINGULAR_REL = 1e-8
LANDING_FRACTION = 0.25
FAILURE_SHRINK = 0.5


@dataclass(frozen=True)
class AdaptConfig:
    tol: float
    k_min: float
    k_max: float
    k0: float
    kappa: float = 0.8
    estimator: str = "absolute"
    max_rejections: int = 50
    floor_policy: str = "abort"

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidArgument("tolerance must be positive")
        if not 0 < self.k_min < self.k_max:
            raise InvalidArgument(f"need 0 < k_min < k_max, got {self.k_min}, {self.k_max}")
        if not 0 < self.kappa <= 1:
            raise InvalidArgument(f"kappa must lie in (0, 1], got {self.kappa}")
        if self.estimator not in ("absolute", "relative"):
            raise InvalidArgument(f"unknown estimator kind {self.estimator!r}")
        if self.max_rejections < 1:
            raise InvalidArgument("max_rejections must be positive")
        if not self.k0 > 0:
            raise InvalidArgument("k0 must be positive")
        if self.floor_policy not in ("abort", "accept"):
            raise InvalidArgument(f"unknown floor policy {self.floor_policy!r}")


class AdaptHistory:
    """Four trailing accepted solutions with their times, plus the DLN
    slopes u_alpha / k_hat of the two most recent complete windows."""

    depth = 4

    def __init__(self, theta: float):
        self.theta = theta
        self.solutions: deque = deque(maxlen=self.depth)
        self.times: deque = deque(maxlen=self.depth)
        self._steps: deque = deque(maxlen=self.depth - 1)
        self.slopes: deque = deque(maxlen=2)  # (t_beta, slope), oldest first

    def push(self, u: np.ndarray, t: float, k: float | None = None):
        """Append an accepted solution.  ``k`` is the nominal step that
        produced it (defaults to the time difference)."""
        if self.times and not t > self.times[-1]:
            raise InvalidArgument("history times must increase")
        self.solutions.append(u)
        self.times.append(t)
        if len(self.times) >= 2:
            self._steps.append(t - self.times[-2] if k is None else k)
        if len(self.solutions) >= 3:
            self.slopes.append(self._slope(-1))

    def _slope(self, end: int):
        """(t_beta, u_alpha / k_hat) for the window ending at index ``end``."""
        sols = list(self.solutions)
        times = list(self.times)
        steps = list(self._steps)
        i = len(sols) + end
        c = dln_coefficients(self.theta, steps[i - 1], steps[i - 2])
        window = (sols[i - 2], sols[i - 1], sols[i])
        t_b = combine((times[i - 2], times[i - 1], times[i]), "beta", c)
        return t_b, combine(window, "alpha", c) / c.k_hat

    @property
    def steps(self) -> list[float]:
        """Trailing steps, oldest first (k_{n-3}, k_{n-2}, k_{n-1})."""
        return list(self._steps)

    @property
    def ready(self) -> bool:
        return len(self.solutions) == self.depth

    def recomputed_slopes(self):
        """Slopes rebuilt from the stored solutions (consistency check)."""
        return [self._slope(-2), self._slope(-1)]


def ab2_like_predict(history: AdaptHistory, t_next: float) -> np.ndarray:
    """Explicit prediction of u(t_next) from the last two DLN slopes."""
    if not history.ready:
        raise NotReady("the predictor needs four accepted solutions")
    (tb2, g2), (tb1, g1) = history.slopes
    t_n = history.times[-1]
    u_n = history.solutions[-1]
    if tb1 == tb2:
        raise NotReady("coincident beta points")
    scale = (t_next - t_n) / (2.0 * (tb1 - tb2))
    return u_n + scale * ((t_next + t_n - 2.0 * tb2) * g1 - (t_next + t_n - 2.0 * tb1) * g2)


def _beta_for_ratio(theta: float, tau: float):
    return dln_coefficients(theta, tau, 1.0).beta


def lte_coefficients(tau_n: float, tau_nm1: float, tau_nm2: float, theta: float):
    """Error constants (G, R) of the DLN step and of the explicit predictor.

    ``tau_m = k_m / k_{m-1}``; the beta weights of the two earlier steps are
    rebuilt from theta and the corresponding ratios.
    """
    for tau in (tau_n, tau_nm1, tau_nm2):
        if not (math.isfinite(tau) and tau > 0):
            raise InvalidArgument(f"step ratios must be positive, got {tau!r}")
    c: DlnCoefficients = dln_coefficients(theta, tau_n, 1.0)
    a0, _, a2 = c.alpha
    b0, _, b2 = c.beta
    p0, _, p2 = _beta_for_ratio(theta, tau_nm1)  # beta^(n-1)
    q0, _, q2 = _beta_for_ratio(theta, tau_nm2)  # beta^(n-2)
    it_n, it_1, it_2 = 1.0 / tau_n, 1.0 / tau_nm1, 1.0 / tau_nm2

    G = (0.5 - a0 / (2.0 * a2) * it_n) * (b2 - b0 * it_n) ** 2 + a0 / (6.0 * a2) * it_n**3 - 1.0 / 6.0
    R = (
        2.0
        + 3.0 * it_n * (1.0 - q2 * it_1 + q0 * it_2 * it_1) * (1.0 - p2 * it_n + p0 * it_1 * it_n)
        + 3.0 * it_n * (1.0 + it_n - q2 * it_1 * it_n + q0 * it_2 * it_1 * it_n) * (-p2 + p0 * it_1)
    ) / 12.0
    return G, R


def estimator_is_singular(G: float, R: float) -> bool:
    return abs(G + R) < SINGULAR_REL * max(abs(G), abs(R), 1.0)


def estimate_lte(diff_norm: float, G: float, R: float, kind: str = "absolute", solution_norm: float = 1.0):
    """T_hat = |G| / |G + R| * |u_dln - u_pred| (optionally relative).

    Returns (T_hat, singular).  When G + R nearly vanishes the raw
    difference norm is used instead and ``singular`` is True.
    """
    singular = estimator_is_singular(G, R)
    factor = 1.0 if singular else abs(G) / abs(G + R)
    value = factor * diff_norm
    if kind == "relative":
        value = value / solution_norm if solution_norm > 0 else math.inf
    elif kind != "absolute":
        raise InvalidArgument(f"unknown estimator kind {kind!r}")
    return value, singular


def controller_factor(T_hat: float, cfg: AdaptConfig) -> float:
    if T_hat <= 0.0:
        return GROWTH_MAX
    return min(GROWTH_MAX, max(SHRINK_MIN, cfg.kappa * (cfg.tol / T_hat) ** (1.0 / 3.0)))


def controller_next_step(k_n: float, T_hat: float, cfg: AdaptConfig) -> float:
    return min(cfg.k_max, max(cfg.k_min, k_n * controller_factor(T_hat, cfg)))


@dataclass
class StepRecord:
    n: int
    t: float
    k: float
    T_hat: float
    accepted: bool
    rejections: int
    energy: float
    singular: bool = False
    forced: bool = False

    FIELDS = ("n", "t", "k", "T_hat", "accepted", "rejections", "energy", "singular", "forced")

    def row(self):
        return [
            self.n,
            self.t,
            self.k,
            self.T_hat,
            int(self.accepted),
            self.rejections,
            self.energy,
            int(self.singular),
            int(self.forced),
        ]


@dataclass
class AdaptStats:
    accepted: int = 0
    rejections: int = 0
    warmup_steps: int = 0
    singular_events: int = 0
    convergence_failures: int = 0
    floor_accepts: int = 0
    stopped_early: bool = False
    records: list = field(default_factory=list)

    @property
    def total_steps(self) -> int:
        return self.accepted + self.warmup_steps


def _landing(t: float, k: float, t_final: float) -> float:
    """Stretch or cut ``k`` so that no sliver of length < k/4 remains."""
    if t_final - (t + k) < LANDING_FRACTION * k:
        return t_final - t
    return k


def adaptive_loop(
    stepper,
    state,
    cfg: AdaptConfig,
    t_final: float,
    t_initial: float | None = None,
    on_accept: Optional[Callable] = None,
    stop: Optional[Callable] = None,
    norm: Optional[Callable] = None,
):
    """Run the accept/reject loop from a two-level starting ``state``.

    ``state.u_prev`` and ``state.u_curr`` are u_0 and u_1 (taken ``cfg.k0``
    apart).  Constant warm-up steps of size ``cfg.k0`` are accepted without
    estimation until four solutions exist.  ``on_accept(state, record)`` is
    called after every accepted step; ``stop(state)`` may end the run early.

    The smallest admissible step is k_min, raised if necessary so that the
    ratio to the previous step stays inside the coefficient guard.  A step
    rejected at that floor aborts the run (``floor_policy="abort"``) or is
    kept and flagged (``floor_policy="accept"``).

    Returns (final state, stats).
    """
    space = stepper.space
    if norm is None:
        M = space.mass

        def norm(v):
            return math.sqrt(max(float(v @ (M @ v)), 0.0))

    history = AdaptHistory(stepper.theta)
    history.push(state.u_prev, state.t_prev)
    history.push(state.u_curr, state.t_curr, state.k_prev)
    stats = AdaptStats()
    stats.warmup_steps = 1
    n = 1

    def accept(new_state, k, T_hat, rejections, singular, forced=False):
        nonlocal n
        n += 1
        history.push(new_state.u_curr, new_state.t_curr, k)
        rec = StepRecord(n, new_state.t_curr, k, T_hat, True, rejections, stepper.energy(new_state), singular, forced)
        stats.records.append(rec)
        if on_accept is not None:
            on_accept(new_state, rec)
        return new_state

    # warm-up at constant k0
    while not history.ready and state.t_curr < t_final:
        k = _landing(state.t_curr, cfg.k0, t_final)
        state, _ = stepper.step(state, k)
        state = accept(state, k, math.nan, 0, False, forced=True)
        stats.warmup_steps += 1

    k_try = cfg.k0
    while state.t_curr < t_final:
        if stop is not None and stop(state):
            stats.stopped_early = True
            break
        rejections = 0
        floor = max(cfg.k_min, history.steps[-1] * RATIO_BOUNDS[0] * (1.0 + 1e-12))
        while True:
            k = _landing(state.t_curr, max(k_try, floor), t_final)
            try:
                new_state, _ = stepper.step(state, k)
            except ConvergenceFailure as exc:
                stats.convergence_failures += 1
                log.info("nonlinear solve failed at t=%.6g, k=%.3e: %s", state.t_curr, k, exc)
                T_hat, singular, factor = math.inf, False, FAILURE_SHRINK
            else:
                pred = ab2_like_predict(history, new_state.t_curr)
                steps = history.steps
                G, R = lte_coefficients(k / steps[-1], steps[-1] / steps[-2], steps[-2] / steps[-3], stepper.theta)
                diff = norm(new_state.u_curr - pred)
                sol_norm = norm(new_state.u_curr) if cfg.estimator == "relative" else 1.0
                T_hat, singular = estimate_lte(diff, G, R, cfg.estimator, sol_norm)
                if singular:
                    stats.singular_events += 1
                    log.debug("estimator denominator vanished at t=%.6g; using raw difference", state.t_curr)
                if T_hat < cfg.tol:
                    state = accept(new_state, k, T_hat, rejections, singular)
                    stats.accepted += 1
                    k_try = controller_next_step(k, T_hat, cfg)
                    break
                factor = controller_factor(T_hat, cfg)

            at_floor = k <= floor
            if at_floor and cfg.floor_policy == "accept" and math.isfinite(T_hat):
                state = accept(new_state, k, T_hat, rejections, singular, forced=True)
                stats.accepted += 1
                stats.floor_accepts += 1
                k_try = controller_next_step(k, T_hat, cfg)
                break
            stats.rejections += 1
            rejections += 1
            stats.records.append(StepRecord(n + 1, state.t_curr + k, k, T_hat, False, rejections, math.nan, singular))
            if at_floor:
                raise StepFloorError(
                    f"step rejected at the floor k={floor:.3e} (t={state.t_curr:.6g}, T_hat={T_hat:.3e})"
                )
            if rejections > cfg.max_rejections:
                raise TooManyRejections(f"{rejections} rejections at t={state.t_curr:.6g}")
            k_try = max(floor, k * factor)
    return state, stats
