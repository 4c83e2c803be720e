"""Step-coefficient algebra for the variable-step DLN two-step family.

Everything here is a pure function of the blending parameter ``theta`` and
the two most recent step sizes ``k_n`` (current) and ``k_prev``.  Windows of
sequence values are always ordered oldest first: ``(z_{n-1}, z_n, z_{n+1})``.
The functions accept floats or numpy arrays for the window entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateCoefficients, InvalidArgument

#: Step ratios k_n / k_prev accepted by :func:`dln_coefficients`.
RATIO_BOUNDS = (1e-3, 1e3)

#: Named parameter values used throughout the experiments.
THETA_DLN = 2.0 / 3.0
THETA_KS = 2.0 / math.sqrt(5.0)
THETA_MIDPOINT = 1.0
THETAS = (THETA_DLN, THETA_KS, THETA_MIDPOINT)


@dataclass(frozen=True)
class DlnCoefficients:
    """Per-step coefficients.  Tuples are indexed by ``l`` = 0, 1, 2."""

    theta: float
    alpha: tuple[float, float, float]
    beta: tuple[float, float, float]
    gamma: tuple[float, float, float]
    eps_n: float
    k_hat: float
    k_n: float
    k_prev: float


@dataclass(frozen=True)
class RefactorCoefficients:
    """Pre-process (a1, a0, b) and post-process (c2, c1, c0) weights that
    turn one backward-Euler solve into one DLN step."""

    a1: float
    a0: float
    b: float
    c2: float
    c1: float
    c0: float


def _check_theta(theta):
    if not (0.0 <= theta <= 1.0) or not math.isfinite(theta):
        raise InvalidArgument(f"theta must lie in [0, 1], got {theta!r}")


def _check_step(k, name):
    if not math.isfinite(k) or k <= 0.0:
        raise InvalidArgument(f"{name} must be positive and finite, got {k!r}")


def step_variability(k_n: float, k_prev: float) -> float:
    """(k_n - k_prev) / (k_n + k_prev), always inside (-1, 1)."""
    _check_step(k_n, "k_n")
    _check_step(k_prev, "k_prev")
    return (k_n - k_prev) / (k_n + k_prev)


def dln_coefficients(theta: float, k_n: float, k_prev: float) -> DlnCoefficients:
    _check_theta(theta)
    eps = step_variability(k_n, k_prev)
    ratio = k_n / k_prev
    if not (RATIO_BOUNDS[0] <= ratio <= RATIO_BOUNDS[1]):
        raise InvalidArgument(
            f"step ratio k_n/k_prev = {ratio:.3e} outside {RATIO_BOUNDS}; "
            f"(k_n={k_n:.3e}, k_prev={k_prev:.3e})"
        )

    th2 = theta * theta
    alpha = (0.5 * (theta - 1.0), -theta, 0.5 * (theta + 1.0))

    denom = (1.0 + eps * theta) ** 2
    q = (1.0 - th2) / denom
    s = eps * eps * theta * (1.0 - th2) / denom
    beta2 = 0.25 * (1.0 + q + s + theta)
    beta1 = 0.5 * (1.0 - q)
    beta0 = 0.25 * (1.0 + q - s - theta)

    # max() absorbs -1e-17 style rounding at theta in {0, 1}
    g1 = -math.sqrt(max(theta * (1.0 - th2), 0.0)) / (math.sqrt(2.0) * (1.0 + eps * theta))
    gamma = (-0.5 * (1.0 + eps) * g1, g1, -0.5 * (1.0 - eps) * g1)

    k_hat = alpha[2] * k_n - alpha[0] * k_prev
    return DlnCoefficients(
        theta=theta,
        alpha=alpha,
        beta=(beta0, beta1, beta2),
        gamma=gamma,
        eps_n=eps,
        k_hat=k_hat,
        k_n=k_n,
        k_prev=k_prev,
    )


def refactor_coefficients(coeffs: DlnCoefficients) -> RefactorCoefficients:
    a0_, a1_, a2_ = coeffs.alpha
    b0, b1, b2 = coeffs.beta
    if b2 == 0.0:
        raise DegenerateCoefficients(f"beta_2 vanished for theta={coeffs.theta}, eps={coeffs.eps_n}")
    return RefactorCoefficients(
        a1=b1 - a1_ * b2 / a2_,
        a0=b0 - a0_ * b2 / a2_,
        b=b2 / a2_,
        c2=1.0 / b2,
        c1=-b1 / b2,
        c0=-b0 / b2,
    )


def combine(window: Sequence, kind: str, coeffs: DlnCoefficients):
    """Linear combinations of a window ``(z_{n-1}, z_n, z_{n+1})``.

    ``alpha`` and ``beta`` use all three entries; ``theta_avg`` and ``star``
    ignore ``z_{n+1}`` (it may be ``None``).  ``star`` is the explicit
    extrapolation of the beta-point value from the two known levels.
    """
    z_prev, z_curr, z_next = window
    if kind == "alpha":
        a = coeffs.alpha
        return a[0] * z_prev + a[1] * z_curr + a[2] * z_next
    if kind == "beta":
        b = coeffs.beta
        return b[0] * z_prev + b[1] * z_curr + b[2] * z_next
    if kind == "theta_avg":
        th = coeffs.theta
        return 0.5 * (1.0 + th) * z_curr + 0.5 * (1.0 - th) * z_prev
    if kind == "star":
        b = coeffs.beta
        rho = coeffs.k_n / coeffs.k_prev
        return b[2] * ((1.0 + rho) * z_curr - rho * z_prev) + b[1] * z_curr + b[0] * z_prev
    raise InvalidArgument(f"unknown combination kind {kind!r}")


def gamma_combination(window: Sequence, coeffs: DlnCoefficients):
    g = coeffs.gamma
    return g[0] * window[0] + g[1] * window[1] + g[2] * window[2]


def _euclidean(u, v):
    return float(np.vdot(u, v))


def g_norm_sq(
    u_new,
    u_old,
    theta: float,
    inner: Callable = _euclidean,
) -> float:
    """G-weighted square norm of the pair ``(u_new, u_old)``."""
    if np.shape(u_new) != np.shape(u_old):
        raise InvalidArgument("G-norm pair must live in the same space")
    return 0.25 * (1.0 + theta) * inner(u_new, u_new) + 0.25 * (1.0 - theta) * inner(u_old, u_old)


def g_identity_residual(window: Sequence, coeffs: DlnCoefficients, inner: Callable = _euclidean) -> float:
    """Left minus right side of the G-stability identity

    (y_alpha, y_beta) = |(y_{n+1}, y_n)|_G^2 - |(y_n, y_{n-1})|_G^2 + |sum gamma_l y|^2
    """
    y_prev, y_curr, y_next = window
    lhs = inner(combine(window, "alpha", coeffs), combine(window, "beta", coeffs))
    gy = gamma_combination(window, coeffs)
    rhs = (
        g_norm_sq(y_next, y_curr, coeffs.theta, inner)
        - g_norm_sq(y_curr, y_prev, coeffs.theta, inner)
        + inner(gy, gy)
    )
    return lhs - rhs


def t_beta(times: Sequence[float], coeffs: DlnCoefficients) -> float:
    t_prev, t_curr, t_next = times
    if not (t_prev < t_curr < t_next):
        raise InvalidArgument(f"times must be strictly increasing, got {tuple(times)}")
    return combine((t_prev, t_curr, t_next), "beta", coeffs)


def step_size_identity_residual(coeffs: DlnCoefficients) -> float:
    """(a2 k_n^2 + a0 k_prev^2) / (2 k_hat) - (b2 k_n - b0 k_prev); zero for
    consistent coefficients.  Used by the property tests."""
    a = coeffs.alpha
    b = coeffs.beta
    kn, kp = coeffs.k_n, coeffs.k_prev
    return (a[2] * kn * kn + a[0] * kp * kp) / (2.0 * coeffs.k_hat) - (b[2] * kn - b[0] * kp)
