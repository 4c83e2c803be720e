"""Vectorized assembly of P2 operators and load vectors.

Scatter-adds go through COO summation or a fixed sparse transpose, so
results are bit-reproducible.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.sparse as sp

from ..errors import NumericalFailure
from .space import FeSpace


def _assemble_matrix(space: FeSpace, local: np.ndarray) -> sp.csr_matrix:
    dofs = space.cell_dofs
    nloc = dofs.shape[1]
    rows = np.repeat(dofs, nloc, axis=1).ravel()
    cols = np.tile(dofs, (1, nloc)).ravel()
    A = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(space.n_dofs, space.n_dofs)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def assemble_mass(space: FeSpace) -> sp.csr_matrix:
    phi, _ = space.basis
    local = np.einsum("cq,qi,qj->cij", space.quad_weights, phi, phi)
    return _assemble_matrix(space, local)


def assemble_stiffness(space: FeSpace) -> sp.csr_matrix:
    g = space.grad_basis
    local = np.einsum("cq,cqid,cqjd->cij", space.quad_weights, g, g)
    return _assemble_matrix(space, local)


def evaluate(space: FeSpace, u: np.ndarray) -> np.ndarray:
    """FE function values at the quadrature points, shape (nc, nq)."""
    E, _ = space.eval_matrix
    return (E @ u).reshape(space.quad_weights.shape)


def evaluate_grad(space: FeSpace, u: np.ndarray) -> np.ndarray:
    """FE gradients at the quadrature points, shape (nc, nq, dim)."""
    return np.einsum("ci,cqid->cqd", u[space.cell_dofs], space.grad_basis)


def _scatter(space: FeSpace, weighted: np.ndarray) -> np.ndarray:
    """Integrate ``weighted`` (nc, nq, already times quadrature weights)
    against every basis function."""
    _, ET = space.eval_matrix
    return ET @ weighted.ravel()


def _check_finite(values: np.ndarray, space: FeSpace, what: str):
    if not np.all(np.isfinite(values)):
        bad = np.argwhere(~np.isfinite(values))[0]
        x = space.quad_points[bad[0], bad[1]]
        raise NumericalFailure(f"{what} is not finite in cell {bad[0]} at x={x.tolist()}")


def assemble_nonlinear_load(space: FeSpace, fn: Callable, *fields: np.ndarray) -> np.ndarray:
    """Vector with entries (fn(u_1, ..., u_m), psi_i), the fields evaluated
    at quadrature points before ``fn`` is applied."""
    vals = fn(*(evaluate(space, u) for u in fields))
    vals = np.broadcast_to(vals, space.quad_weights.shape)
    _check_finite(vals, space, "nonlinear integrand")
    return _scatter(space, vals * space.quad_weights)


def assemble_source(space: FeSpace, fn: Callable, t: float) -> np.ndarray:
    """Load vector (g(., t), psi_i) for a space-time callable g(*x, t)."""
    x = space.quad_points
    vals = fn(*(x[..., d] for d in range(space.dim)), t)
    vals = np.broadcast_to(vals, space.quad_weights.shape)
    _check_finite(vals, space, "source term")
    return _scatter(space, vals * space.quad_weights)


def integrate(space: FeSpace, fn: Callable, *fields: np.ndarray) -> float:
    """Quadrature value of the integral of fn(u_1, ..., u_m) over the domain."""
    vals = fn(*(evaluate(space, u) for u in fields))
    vals = np.broadcast_to(vals, space.quad_weights.shape)
    return float(np.sum(vals * space.quad_weights))


def interpolate(space: FeSpace, fn: Callable, *args) -> np.ndarray:
    """Nodal P2 interpolant of fn(*x, *args)."""
    vals = fn(*space.coords_split(), *args)
    return np.array(np.broadcast_to(vals, (space.n_dofs,)), dtype=float)
