"""Spatial error norms and discrete-in-time aggregation."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..errors import InvalidArgument
from .assembly import evaluate, evaluate_grad
from .space import FeSpace


def l2_norm(space: FeSpace, u: np.ndarray) -> float:
    return float(np.sqrt(max(u @ (space.mass @ u), 0.0)))


def h1_seminorm(space: FeSpace, u: np.ndarray) -> float:
    return float(np.sqrt(max(u @ (space.stiffness @ u), 0.0)))


def error_norm(
    space: FeSpace,
    u: np.ndarray,
    exact: Callable,
    kind: str = "L2",
    exact_grad: Callable | None = None,
) -> float:
    """Quadrature norm of ``u - exact``.

    ``exact(*x)`` and ``exact_grad(*x)`` are evaluated at quadrature points;
    the gradient callable returns a sequence with one array per axis.
    ``kind="H1"`` is the full norm (L2 part plus gradient part).
    """
    kind = kind.upper()
    if kind not in ("L2", "H1"):
        raise InvalidArgument(f"unknown norm kind {kind!r}")
    x = space.quad_points
    coords = tuple(x[..., d] for d in range(space.dim))
    w = space.quad_weights
    diff = evaluate(space, u) - np.broadcast_to(exact(*coords), w.shape)
    total = np.sum(w * diff * diff)
    if kind == "H1":
        if exact_grad is None:
            raise InvalidArgument("H1 error needs the exact gradient")
        grad_u = evaluate_grad(space, u)
        g = exact_grad(*coords)
        for d in range(space.dim):
            gd = grad_u[..., d] - np.broadcast_to(g[d], w.shape)
            total += np.sum(w * gd * gd)
    return float(np.sqrt(total))


def discrete_time_norm(errors: Sequence[float], steps: Sequence[float] | None = None, kind: str = "linf") -> float:
    """max_n e_n (``linf``) or sqrt(sum_n k_n e_n^2) (``l2``)."""
    e = np.asarray(errors, dtype=float)
    if kind == "linf":
        return float(np.max(np.abs(e))) if e.size else 0.0
    if kind != "l2":
        raise InvalidArgument(f"unknown time norm {kind!r}")
    if steps is None or len(steps) != e.size:
        raise InvalidArgument("l2 time norm needs one step per error value")
    k = np.asarray(steps, dtype=float)
    return float(np.sqrt(np.sum(k * e * e)))
