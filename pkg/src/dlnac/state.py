"""Trailing-solution snapshots carried between steps."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class SchemeState:
    """Two trailing solutions u_n (``u_curr``) and u_{n-1} (``u_prev``).

    ``k_prev`` is the step that produced ``u_curr``; it defaults to
    ``t_curr - t_prev`` but can be set explicitly for bootstrap states whose
    ``u_prev`` is a placeholder.
    """

    u_curr: np.ndarray
    u_prev: np.ndarray
    t_curr: float
    t_prev: float
    k_prev: float = None

    def __post_init__(self):
        if np.shape(self.u_curr) != np.shape(self.u_prev):
            raise InvalidArgument("u_curr and u_prev must live in the same space")
        if not self.t_prev < self.t_curr:
            raise InvalidArgument(f"need t_prev < t_curr, got {self.t_prev} >= {self.t_curr}")
        if self.k_prev is None:
            object.__setattr__(self, "k_prev", self.t_curr - self.t_prev)
        if not (math.isfinite(self.k_prev) and self.k_prev > 0):
            raise InvalidArgument(f"k_prev must be positive, got {self.k_prev}")

    def advance(self, u_next: np.ndarray, t_next: float, k: float | None = None, **extra) -> "SchemeState":
        """Shift the window; ``k`` is the step just taken (the nominal value
        is kept so that equal steps give exactly zero step variability)."""
        return replace(
            self,
            u_prev=self.u_curr,
            u_curr=u_next,
            t_prev=self.t_curr,
            t_curr=t_next,
            k_prev=t_next - self.t_curr if k is None else float(k),
            **extra,
        )


@dataclass(frozen=True)
class SavState(SchemeState):
    """Adds the auxiliary scalar pair r_n (``r_curr``), r_{n-1} (``r_prev``)."""

    r_curr: float = 0.0
    r_prev: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if not (math.isfinite(self.r_curr) and math.isfinite(self.r_prev)):
            raise InvalidArgument("auxiliary variable must be finite")

    def advance(self, u_next, t_next, k=None, r_next: float = None, **extra) -> "SavState":
        if r_next is None:
            raise InvalidArgument("SAV states advance with a new auxiliary value")
        return super().advance(u_next, t_next, k, r_prev=self.r_curr, r_curr=float(r_next), **extra)


@dataclass(frozen=True)
class StepDiagnostics:
    t_beta: float
    k_hat: float
    iterations: int = 0
    increment: float = 0.0
    linear_solves: int = 0
