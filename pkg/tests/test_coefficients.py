import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlnac.coefficients import (
    THETA_DLN,
    THETA_KS,
    THETAS,
    combine,
    dln_coefficients,
    g_identity_residual,
    g_norm_sq,
    gamma_combination,
    refactor_coefficients,
    step_size_identity_residual,
    step_variability,
    t_beta,
)
from dlnac.errors import InvalidArgument

thetas = st.floats(0.0, 1.0)
steps = st.floats(1e-4, 1.0)


def ratio_ok(a, b):
    return 1e-3 <= a / b <= 1e3


def test_constant_step_dln_values():
    c = dln_coefficients(THETA_DLN, 0.1, 0.1)
    assert c.eps_n == 0.0
    assert c.alpha == pytest.approx((-1 / 6, -2 / 3, 5 / 6), abs=1e-15)
    # q = 5/9 at eps = 0
    assert c.beta == pytest.approx((1 / 4 * (1 + 5 / 9 - 2 / 3), 0.5 * (1 - 5 / 9), 0.25 * (1 + 5 / 9 + 2 / 3)))
    assert c.k_hat == pytest.approx(0.1)


def test_midpoint_degeneration():
    c = dln_coefficients(1.0, 0.3, 0.1)
    assert c.alpha == (0.0, -1.0, 1.0)
    assert c.beta == pytest.approx((0.0, 0.5, 0.5), abs=1e-16)
    assert all(g == 0 for g in c.gamma)
    assert c.k_hat == 0.3


def test_step_variability_bounds():
    assert step_variability(1.0, 1.0) == 0.0
    assert -1 < step_variability(1e-9, 1.0) < -0.99
    with pytest.raises(InvalidArgument):
        step_variability(0.0, 1.0)


@pytest.mark.parametrize("bad", [-0.1, 1.2, math.nan])
def test_theta_range(bad):
    with pytest.raises(InvalidArgument):
        dln_coefficients(bad, 0.1, 0.1)


def test_ratio_guard():
    with pytest.raises(InvalidArgument):
        dln_coefficients(0.5, 1.0, 1e-4)


@given(thetas, steps, steps)
def test_sums_and_step_identity(theta, kn, kp):
    if not ratio_ok(kn, kp):
        return
    c = dln_coefficients(theta, kn, kp)
    assert abs(sum(c.alpha)) < 1e-15
    assert abs(sum(c.beta) - 1.0) < 1e-14
    assert abs(step_size_identity_residual(c)) <= 1e-13 * max(kn, kp)
    # second-order consistency: sum l * alpha_l = 1 relative to k_hat and
    # beta-weighted time is the alpha-weighted derivative point
    assert abs(c.alpha[2] * kn - c.alpha[0] * kp - c.k_hat) < 1e-15


@given(thetas, steps, steps)
def test_gamma_relations(theta, kn, kp):
    if not ratio_ok(kn, kp):
        return
    c = dln_coefficients(theta, kn, kp)
    g0, g1, g2 = c.gamma
    assert g0 == -0.5 * (1 + c.eps_n) * g1
    assert g2 == -0.5 * (1 - c.eps_n) * g1
    assert abs(g0 + g1 + g2) < 1e-15


@given(thetas, steps, steps, st.integers(0, 2**32 - 1))
def test_g_stability_identity(theta, kn, kp, seed):
    if not ratio_ok(kn, kp):
        return
    c = dln_coefficients(theta, kn, kp)
    y = np.random.default_rng(seed).standard_normal((3, 7))
    scale = float(np.sum(y * y))
    assert abs(g_identity_residual(tuple(y), c)) <= 1e-12 * scale


@pytest.mark.parametrize("theta", THETAS)
def test_refactor_round_trip_direct(theta, rng):
    """pre-process, BE step with k_be = b k_hat and post-process reproduce the
    DLN combination for a linear right-hand side y' = A y."""
    A = -np.diag(rng.uniform(0.5, 3.0, 5))
    kn, kp = 0.13, 0.07
    c = dln_coefficients(theta, kn, kp)
    rc = refactor_coefficients(c)
    y_prev, y_curr = rng.standard_normal(5), rng.standard_normal(5)
    # direct one-leg DLN: (a2 y + a1 y_n + a0 y_{n-1}) / k_hat = A (b2 y + b1 y_n + b0 y_{n-1})
    lhs = c.alpha[2] / c.k_hat * np.eye(5) - c.beta[2] * A
    rhs = -(c.alpha[1] * y_curr + c.alpha[0] * y_prev) / c.k_hat + A @ (c.beta[1] * y_curr + c.beta[0] * y_prev)
    direct = np.linalg.solve(lhs, rhs)
    y_old = rc.a1 * y_curr + rc.a0 * y_prev
    k_be = rc.b * c.k_hat
    y_temp = np.linalg.solve(np.eye(5) - k_be * A, y_old)
    y_next = rc.c2 * y_temp + rc.c1 * y_curr + rc.c0 * y_prev
    assert np.allclose(y_next, direct, rtol=1e-13, atol=1e-13 * np.abs(direct).max())


def test_combine_kinds(rng):
    c = dln_coefficients(THETA_KS, 0.2, 0.1)
    w = (1.0, 2.0, 4.0)
    assert combine(w, "alpha", c) == pytest.approx(sum(a * z for a, z in zip(c.alpha, w)))
    assert combine(w, "beta", c) == pytest.approx(sum(b * z for b, z in zip(c.beta, w)))
    th = c.theta
    assert combine((1.0, 2.0, None), "theta_avg", c) == pytest.approx(0.5 * (1 + th) * 2 + 0.5 * (1 - th))
    # star equals beta-combination with the linear extrapolant in slot n+1
    star = combine((1.0, 2.0, None), "star", c)
    assert star == pytest.approx(combine((1.0, 2.0, 2.0 + 2.0 * 1.0), "beta", c))
    with pytest.raises(InvalidArgument):
        combine(w, "nope", c)


def test_star_is_exact_on_linear_data():
    c = dln_coefficients(THETA_DLN, 0.3, 0.1)
    times = (0.0, 0.1, 0.4)
    lin = lambda t: 2.0 - 3.0 * t  # noqa: E731
    assert combine((lin(0.0), lin(0.1), None), "star", c) == pytest.approx(lin(t_beta(times, c)))


def test_gamma_combination_and_g_norm():
    c = dln_coefficients(THETA_DLN, 0.1, 0.1)
    assert gamma_combination((1.0, 1.0, 1.0), c) == pytest.approx(0.0, abs=1e-15)
    assert g_norm_sq(np.ones(2), np.zeros(2), 1.0) == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        g_norm_sq(np.ones(2), np.ones(3), 0.5)


def test_t_beta_ordering():
    c = dln_coefficients(THETA_DLN, 0.1, 0.1)
    assert 0.1 < t_beta((0.0, 0.1, 0.2), c) < 0.2
    with pytest.raises(InvalidArgument):
        t_beta((0.0, 0.2, 0.1), c)
