import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlnac.adaptive import (
    AdaptConfig,
    AdaptHistory,
    ab2_like_predict,
    adaptive_loop,
    controller_factor,
    controller_next_step,
    estimate_lte,
    estimator_is_singular,
    lte_coefficients,
)
from dlnac.coefficients import THETA_DLN, THETA_KS, THETAS
from dlnac.errors import InvalidArgument, NotReady, StepFloorError
from dlnac.fem import FeSpace, interval_mesh
from dlnac.model import ModelParams
from dlnac.modified import ModifiedDLNStepper
from dlnac.state import SchemeState


def brute_beta(theta, tau):
    """beta_0, beta_2 written out from the step variability of ratio tau."""
    e = (tau - 1.0) / (tau + 1.0)
    d = (1.0 + e * theta) ** 2
    b2 = (1.0 + (1.0 - theta**2) / d + e**2 * theta * (1.0 - theta**2) / d + theta) / 4.0
    b0 = (1.0 + (1.0 - theta**2) / d - e**2 * theta * (1.0 - theta**2) / d - theta) / 4.0
    return b0, b2


def brute_G_R(tn, t1, t2, theta):
    a0, a2 = (theta - 1.0) / 2.0, (theta + 1.0) / 2.0
    b0, b2 = brute_beta(theta, tn)
    c0, c2 = brute_beta(theta, t1)  # beta^(n-1)
    d0, d2 = brute_beta(theta, t2)  # beta^(n-2)
    G = (1 / 2 - a0 / (2 * a2) / tn) * (b2 - b0 / tn) ** 2 + a0 / (6 * a2) / tn**3 - 1 / 6
    first = 3 / tn * (1 - d2 / t1 + d0 / t2 / t1) * (1 - c2 / tn + c0 / t1 / tn)
    second = 3 / tn * (1 + 1 / tn - d2 / t1 / tn + d0 / t2 / t1 / tn) * (-c2 + c0 / t1)
    R = (2 + first + second) / 12
    return G, R


ratios = st.floats(0.2, 5.0)


@given(ratios, ratios, ratios, st.floats(0.0, 1.0))
def test_lte_coefficients_match_transcription(tn, t1, t2, theta):
    G, R = lte_coefficients(tn, t1, t2, theta)
    Gb, Rb = brute_G_R(tn, t1, t2, theta)
    assert abs(G - Gb) <= 1e-14 * max(1.0, abs(Gb))
    assert abs(R - Rb) <= 1e-14 * max(1.0, abs(Rb))


def test_lte_reference_values():
    G, R = lte_coefficients(1.0, 1.0, 1.0, 1.0)
    assert G == pytest.approx(-1 / 24, abs=1e-15)
    assert R == pytest.approx(1 / 24, abs=1e-15)
    G, R = lte_coefficients(1.0, 1.0, 1.0, THETA_DLN)
    assert G == pytest.approx(-2 / 15, abs=1e-14)
    assert R == pytest.approx(5 / 36, abs=1e-14)


def test_lte_ratio_validation():
    with pytest.raises(InvalidArgument):
        lte_coefficients(0.0, 1.0, 1.0, 0.5)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_singular_guard_definition(G, R):
    expect = abs(G + R) < 1e-8 * max(abs(G), abs(R), 1.0)
    assert estimator_is_singular(G, R) == expect


def test_uniform_midpoint_is_singular():
    """At theta = 1 with equal steps G + R cancels exactly; the estimator
    falls back to the raw difference."""
    G, R = lte_coefficients(1.0, 1.0, 1.0, 1.0)
    value, singular = estimate_lte(2.0, G, R)
    assert singular and value == 2.0


@pytest.mark.parametrize("theta", [THETA_DLN, THETA_KS])
def test_not_singular_on_uniform_or_mild_ratios(theta):
    for tn, t1, t2 in [(1.0, 1.0, 1.0), (1.2, 0.9, 1.1), (0.5, 1.5, 1.0)]:
        assert not estimator_is_singular(*lte_coefficients(tn, t1, t2, theta))


def test_estimate_lte_kinds():
    v, s = estimate_lte(1.0, -1.0, 3.0)
    assert v == pytest.approx(0.5) and not s
    v, _ = estimate_lte(1.0, -1.0, 3.0, "relative", 4.0)
    assert v == pytest.approx(0.125)
    with pytest.raises(InvalidArgument):
        estimate_lte(1.0, -1.0, 3.0, "weird")


def filled_history(fn, times, theta):
    h = AdaptHistory(theta)
    for i, t in enumerate(times):
        h.push(np.array([fn(t)]), t, None if i == 0 else t - times[i - 1])
    return h


@given(st.lists(st.floats(0.3, 3.0), min_size=4, max_size=4), st.floats(0.0, 1.0))
def test_predictor_exact_on_quadratics(steps, theta):
    times = np.concatenate([[0.0], np.cumsum(steps[:3])])
    fn = lambda t: 1.0 - 2.0 * t + 0.7 * t * t  # noqa: E731
    h = filled_history(fn, list(times), theta)
    t_next = times[-1] + steps[3]
    assert ab2_like_predict(h, t_next)[0] == pytest.approx(fn(t_next), rel=1e-11, abs=1e-11)


def test_history_requirements():
    h = AdaptHistory(THETA_DLN)
    h.push(np.zeros(1), 0.0)
    with pytest.raises(NotReady):
        ab2_like_predict(h, 1.0)
    with pytest.raises(InvalidArgument):
        h.push(np.zeros(1), 0.0)
    for t in (0.1, 0.3, 0.4):
        h.push(np.array([t]), t)
    assert h.ready
    (a, b) = h.recomputed_slopes()
    assert np.allclose(a[1], h.slopes[0][1]) and np.allclose(b[1], h.slopes[1][1])


def test_controller_clamps():
    cfg = AdaptConfig(tol=1e-6, k_min=1e-5, k_max=0.1, k0=1e-3)
    assert controller_factor(0.0, cfg) == 1.5
    assert controller_factor(1e-20, cfg) == 1.5
    assert controller_factor(1.0, cfg) == 0.2
    assert controller_factor(1e-6, cfg) == pytest.approx(0.8)
    assert controller_next_step(0.09, 1e-20, cfg) == 0.1
    assert controller_next_step(2e-5, 1.0, cfg) == 1e-5


@pytest.mark.parametrize(
    "kwargs",
    [dict(tol=0.0), dict(k_min=0.2), dict(kappa=1.5), dict(estimator="x"), dict(floor_policy="x"), dict(k0=0.0)],
)
def test_config_validation(kwargs):
    base = dict(tol=1e-6, k_min=1e-5, k_max=0.1, k0=1e-3)
    base.update(kwargs)
    with pytest.raises(InvalidArgument):
        AdaptConfig(**base)


def small_problem(theta):
    space = FeSpace(interval_mesh(0.0, 2 * np.pi, 12), periodic=True)
    x = space.dof_coords[:, 0]
    u0 = 0.5 * np.sin(x)
    stepper = ModifiedDLNStepper(space, ModelParams(0.3), theta)
    u1 = stepper.step(SchemeState(u0, u0, 0.0, -1e-2, 1e-2), 1e-2)[0].u_curr
    return stepper, SchemeState(u1, u0, 1e-2, 0.0)


@pytest.mark.parametrize("theta", THETAS)
def test_loop_lands_on_final_time(theta):
    stepper, state = small_problem(theta)
    cfg = AdaptConfig(tol=1e-4, k_min=1e-5, k_max=0.5, k0=1e-2, floor_policy="accept")
    seen = []
    final, stats = adaptive_loop(stepper, state, cfg, 2.0, on_accept=lambda s, r: seen.append(r))
    assert final.t_curr == pytest.approx(2.0, abs=1e-12)
    assert stats.warmup_steps == 3
    assert len(seen) == stats.accepted + 2
    assert all(r.accepted for r in seen)
    assert stats.total_steps == len([r for r in stats.records if r.accepted]) + 1
    energies = [r.energy for r in seen]
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))
    # steps grow once the solution settles
    assert max(r.k for r in seen) > 5 * cfg.k0


def test_loop_stop_callback():
    stepper, state = small_problem(1.0)
    cfg = AdaptConfig(tol=1e-4, k_min=1e-5, k_max=0.5, k0=1e-2)
    final, stats = adaptive_loop(stepper, state, cfg, 10.0, stop=lambda s: s.t_curr > 0.5)
    assert stats.stopped_early and 0.5 < final.t_curr < 10.0


def test_floor_abort():
    stepper, state = small_problem(THETA_DLN)
    cfg = AdaptConfig(tol=1e-14, k_min=5e-3, k_max=0.5, k0=1e-2)
    with pytest.raises(StepFloorError):
        adaptive_loop(stepper, state, cfg, 1.0)


def test_floor_accept_flags_steps():
    stepper, state = small_problem(THETA_DLN)
    cfg = AdaptConfig(tol=1e-14, k_min=5e-3, k_max=0.5, k0=1e-2, floor_policy="accept")
    final, stats = adaptive_loop(stepper, state, cfg, 0.2)
    assert stats.floor_accepts > 0
    assert math.isclose(final.t_curr, 0.2)
