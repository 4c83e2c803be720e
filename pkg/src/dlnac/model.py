"""Allen-Cahn double-well potential and its discrete derivatives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgument


def F(u):
    """Double-well potential (u^2 - 1)^2 / 4."""
    return 0.25 * (u * u - 1.0) ** 2


def f(u):
    """F'(u) = u^3 - u."""
    return u * u * u - u


def f_tilde(a, b):
    """Secant quotient (F(a) - F(b)) / (a - b) in expanded polynomial form.

    The expansion is exact for every pair, continuous across ``a == b``
    (where it reduces to f(a)), and free of the cancellation a literal
    difference quotient suffers when ``a`` and ``b`` are close.
    """
    a2 = a * a
    b2 = b * b
    return 0.25 * ((a2 * a + a2 * b + a * b2 + b2 * b) - 2.0 * (a + b))


def f_hat_css(u_impl, u_expl, u_old):
    """Convex-split quotient: secant of (u^4 + 1)/4 between ``u_impl`` and
    ``u_old`` minus secant of u^2/2 between ``u_expl`` and ``u_old``."""
    a2 = u_impl * u_impl
    b2 = u_old * u_old
    implicit = 0.25 * (a2 * u_impl + a2 * u_old + u_impl * b2 + b2 * u_old)
    explicit = 0.5 * (u_expl + u_old)
    return implicit - explicit


@dataclass(frozen=True)
class ModelParams:
    """``forcing`` is a callable g(*x, t) added to the right-hand side."""

    epsilon: float
    forcing: Optional[Callable] = None

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidArgument(f"epsilon must be positive, got {self.epsilon!r}")
