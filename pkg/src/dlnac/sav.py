"""Linear DLN stepper with a scalar auxiliary variable.

A DLN step is carried out as pre-process -> one backward-Euler SAV solve ->
post-process.  The backward-Euler system

    [M + eps^2 k K + (k/2) B B^T] U = W,     B_i = (phi, v_i),

is a sparse SPD matrix plus a rank-one term, and is solved with two sparse
solves against the same matrix and a Sherman-Morrison scalar.

phi = f(u*) / sqrt(E(u*) + c0) enters only through B.  By default B is
integrated by quadrature of f(u*_h) against the basis ("quadrature");
"interpolant" uses B = M I_h phi with the nodal P2 interpolant, which adds an
O(h^3) consistency error that is visible on under-resolved fronts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .coefficients import (
    DlnCoefficients,
    combine,
    dln_coefficients,
    g_norm_sq,
    gamma_combination,
    refactor_coefficients,
)
from .errors import InvalidArgument, InvalidState
from .fem.assembly import assemble_nonlinear_load, assemble_source, integrate
from .fem.boundary import BoundaryCondition, DofSplit
from .fem.space import FeSpace
from .linsolve import FactorizationCache, factorize
from .model import F, f
from .modified import default_bc
from .state import SavState, StepDiagnostics

ENERGY_FLOOR = 1e-14
PHI_MODES = ("quadrature", "interpolant")


@dataclass(frozen=True)
class SavParams:
    epsilon: float
    c0: float = 0.0
    forcing: Optional[Callable] = None
    phi_mode: str = "quadrature"

    def __post_init__(self):
        if self.phi_mode not in PHI_MODES:
            raise InvalidArgument(f"unknown phi_mode {self.phi_mode!r}; choose from {PHI_MODES}")
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidArgument(f"epsilon must be positive, got {self.epsilon!r}")
        if not (math.isfinite(self.c0) and self.c0 >= 0):
            raise InvalidArgument(f"c0 must be nonnegative, got {self.c0!r}")


def potential_energy(space: FeSpace, u: np.ndarray) -> float:
    """Quadrature value of the integral of (u^2 - 1)^2 / 4."""
    return integrate(space, F, u)


def phi_field(space: FeSpace, u_star: np.ndarray, c0: float):
    """Nodal interpolant of f(u*) / sqrt(E(u*) + c0), and the denominator."""
    shifted = potential_energy(space, u_star) + c0
    if not shifted >= ENERGY_FLOOR:
        raise InvalidState(
            f"E(u*) + c0 = {shifted:.3e} is below {ENERGY_FLOOR:g}; "
            "use a positive c0 for states this close to the wells"
        )
    denom = math.sqrt(shifted)
    return f(u_star) / denom, denom


def phi_load(space: FeSpace, u_star: np.ndarray, c0: float, mode: str = "quadrature") -> np.ndarray:
    """The vector B_i = (phi, v_i) of the rank-one term."""
    if mode == "interpolant":
        phi, _ = phi_field(space, u_star, c0)
        return space.mass @ phi
    if mode != "quadrature":
        raise InvalidArgument(f"unknown phi_mode {mode!r}; choose from {PHI_MODES}")
    shifted = potential_energy(space, u_star) + c0
    if not shifted >= ENERGY_FLOOR:
        raise InvalidState(
            f"E(u*) + c0 = {shifted:.3e} is below {ENERGY_FLOOR:g}; "
            "use a positive c0 for states this close to the wells"
        )
    return assemble_nonlinear_load(space, f, u_star) / math.sqrt(shifted)


def initial_auxiliary(space: FeSpace, u: np.ndarray, c0: float = 0.0) -> float:
    return math.sqrt(potential_energy(space, u) + c0)


class SavStepper:
    """DLN-SAV stepper bound to one space, model and theta."""

    def __init__(self, space: FeSpace, params: SavParams, theta: float, bc: BoundaryCondition | None = None):
        self.space = space
        self.params = params
        self.theta = float(theta)
        self.bc = bc or default_bc(space)
        self.split = DofSplit.build(space, self.bc)
        self._cache = FactorizationCache()
        self.n_solves = 0

    def coefficients(self, state: SavState, k_n: float) -> DlnCoefficients:
        return dln_coefficients(self.theta, k_n, state.k_prev)

    def _operator(self, k_be: float):
        """Factorized free block of M + eps^2 k_be K and the coupling block."""

        def build():
            A = self.space.mass + self.space.stiffness * (self.params.epsilon**2 * k_be)
            A_FF, A_FB = self.split.blocks(A)
            return factorize(A_FF), A_FB

        return self._cache.get(k_be, build)

    def be_substep(
        self,
        u_old: np.ndarray,
        r_old: float,
        k_be: float,
        u_star: np.ndarray,
        load: np.ndarray | None = None,
        boundary_values: np.ndarray | None = None,
    ):
        """One backward-Euler SAV step of size ``k_be``.

        ``load`` is an extra right-hand side (forcing integrated against the
        basis); ``boundary_values`` prescribes the new solution on the
        constrained dofs.  Returns (u_temp, r_temp).
        """
        if not (math.isfinite(k_be) and k_be > 0):
            raise InvalidArgument(f"k_be must be positive, got {k_be!r}")
        M = self.space.mass
        B = phi_load(self.space, u_star, self.params.c0, self.params.phi_mode)
        half_k = 0.5 * k_be
        W = M @ u_old + (half_k * float(B @ u_old) - k_be * r_old) * B
        if load is not None:
            W = W + k_be * load

        fact, A_FB = self._operator(k_be)
        split = self.split
        B_F = B[split.free] if not split.trivial else B
        if split.trivial:
            rhs = W
        else:
            U_B = boundary_values
            s_B = float(B[split.fixed] @ U_B)
            rhs = split.reduce_rhs(W, A_FB, U_B) - half_k * s_B * B_F

        z1 = fact.solve(B_F)
        z2 = fact.solve(rhs)
        self.n_solves += 2
        denom = 1.0 + half_k * float(B_F @ z1)
        if not denom > 0:
            raise InvalidState(f"rank-one denominator {denom:.3e} is not positive")
        s = float(B_F @ z2) / denom
        u_temp = split.expand(z2 - half_k * s * z1, boundary_values)
        r_temp = r_old + 0.5 * float(B @ (u_temp - u_old))
        return u_temp, r_temp

    def step(self, state: SavState, k_n: float):
        c = self.coefficients(state, k_n)
        rc = refactor_coefficients(c)
        t_next = state.t_curr + k_n
        t_b = combine((state.t_prev, state.t_curr, t_next), "beta", c)

        u_old = rc.a1 * state.u_curr + rc.a0 * state.u_prev
        r_old = rc.a1 * state.r_curr + rc.a0 * state.r_prev
        k_be = rc.b * c.k_hat
        u_star = combine((state.u_prev, state.u_curr, None), "star", c)
        load = None
        if self.params.forcing is not None:
            load = assemble_source(self.space, self.params.forcing, t_b)
        bvals = None
        g_next = None
        if self.bc.is_dirichlet:
            g_next = self.bc.values(self.space, t_next)
            fixed = self.split.fixed
            bvals = c.beta[0] * state.u_prev[fixed] + c.beta[1] * state.u_curr[fixed] + c.beta[2] * g_next

        u_temp, r_temp = self.be_substep(u_old, r_old, k_be, u_star, load, bvals)

        u_next = rc.c2 * u_temp + rc.c1 * state.u_curr + rc.c0 * state.u_prev
        r_next = rc.c2 * r_temp + rc.c1 * state.r_curr + rc.c0 * state.r_prev
        if g_next is not None:
            u_next[self.split.fixed] = g_next
        diag = StepDiagnostics(t_b, c.k_hat, iterations=0, increment=0.0, linear_solves=2)
        return state.advance(u_next, t_next, k_n, r_next=r_next), diag

    # -------------------------------------------------------------- energy
    def energy(self, state: SavState) -> float:
        K = self.space.stiffness
        grad_part = g_norm_sq(state.u_curr, state.u_prev, self.theta, inner=lambda a, b: float(a @ (K @ b)))
        th = self.theta
        return (
            self.params.epsilon**2 * grad_part
            + 0.5 * (1.0 + th) * state.r_curr**2
            + 0.5 * (1.0 - th) * state.r_prev**2
        )

    def dissipation_residual(self, pre: SavState, post: SavState) -> float:
        """|u_alpha|^2 / k_hat + E_{n+1} - E_n + eps^2 |grad sum gamma u|^2
        + 2 (sum gamma r)^2, zero for an exactly solved unforced step."""
        c = self.coefficients(pre, post.k_prev)
        window = (pre.u_prev, pre.u_curr, post.u_curr)
        ua = combine(window, "alpha", c)
        gu = gamma_combination(window, c)
        gr = gamma_combination((pre.r_prev, pre.r_curr, post.r_curr), c)
        M, K = self.space.mass, self.space.stiffness
        return (
            float(ua @ (M @ ua)) / c.k_hat
            + self.energy(post)
            - self.energy(pre)
            + self.params.epsilon**2 * float(gu @ (K @ gu))
            + 2.0 * gr * gr
        )

    def r_drift(self, state: SavState) -> float:
        """|r_n - sqrt(E(u_n) + c0)|, a diagnostic only."""
        return abs(state.r_curr - initial_auxiliary(self.space, state.u_curr, self.params.c0))


def be_sav_substep(space, u_old, r_old, k_be, u_star, params: SavParams, bc=None, load=None, boundary_values=None):
    return SavStepper(space, params, 1.0, bc).be_substep(u_old, r_old, k_be, u_star, load, boundary_values)


def step_sav(space, state: SavState, k_n, theta, params: SavParams, bc=None):
    return SavStepper(space, params, theta, bc).step(state, k_n)


def energy_sav(space, state: SavState, theta, params: SavParams) -> float:
    return SavStepper(space, params, theta).energy(state)


def dissipation_residual_sav(space, pre: SavState, post: SavState, theta, params: SavParams) -> float:
    return SavStepper(space, params, theta).dissipation_residual(pre, post)
