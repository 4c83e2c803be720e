"""Boundary conditions.

Dirichlet data is imposed by symmetric elimination: the system is restricted
to the free dofs and the known boundary values are moved to the right-hand
side.  The reduced matrix stays symmetric positive definite, which the
factorization layer relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidArgument
from .space import FeSpace

KINDS = ("natural", "dirichlet", "periodic")


@dataclass(frozen=True)
class BoundaryCondition:
    """``value`` is either a number or a callable g(*x, t) (Dirichlet only)."""

    kind: str = "natural"
    value: float | Callable | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidArgument(f"unknown boundary kind {self.kind!r}")

    @property
    def is_dirichlet(self) -> bool:
        return self.kind == "dirichlet"

    def check(self, space: FeSpace):
        if self.kind == "periodic" and not space.periodic:
            raise InvalidArgument("periodic condition needs a space built with periodic=True")
        if self.kind != "periodic" and space.periodic:
            raise InvalidArgument(f"{self.kind} condition on a periodic space")

    def values(self, space: FeSpace, t: float) -> np.ndarray:
        """Prescribed values on ``space.boundary_dofs`` at time ``t``."""
        nodes = space.dof_coords[space.boundary_dofs]
        if self.value is None:
            return np.zeros(nodes.shape[0])
        if callable(self.value):
            vals = self.value(*(nodes[:, d] for d in range(space.dim)), t)
            return np.array(np.broadcast_to(vals, (nodes.shape[0],)), dtype=float)
        return np.full(nodes.shape[0], float(self.value))


@dataclass
class DofSplit:
    """Free / constrained dof partition for one space and condition."""

    n_dofs: int
    free: np.ndarray
    fixed: np.ndarray
    _blocks: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, space: FeSpace, bc: BoundaryCondition) -> "DofSplit":
        bc.check(space)
        if bc.is_dirichlet:
            fixed = np.asarray(space.boundary_dofs)
        else:
            fixed = np.zeros(0, dtype=np.int64)
        mask = np.ones(space.n_dofs, dtype=bool)
        mask[fixed] = False
        return cls(space.n_dofs, np.flatnonzero(mask), fixed)

    @property
    def trivial(self) -> bool:
        return self.fixed.size == 0

    def blocks(self, A: sp.spmatrix):
        """(A_FF, A_FB) in CSR."""
        A = sp.csr_matrix(A)
        if self.trivial:
            return A, None
        A_FF = A[self.free][:, self.free].tocsr()
        A_FB = A[self.free][:, self.fixed].tocsr()
        return A_FF, A_FB

    def reduce_rhs(self, rhs: np.ndarray, A_FB, fixed_values: np.ndarray | None) -> np.ndarray:
        if self.trivial:
            return rhs
        r = rhs[self.free]
        if fixed_values is not None and A_FB is not None:
            r = r - A_FB @ fixed_values
        return r

    def expand(self, x_free: np.ndarray, fixed_values: np.ndarray | None) -> np.ndarray:
        if self.trivial:
            return np.asarray(x_free, dtype=float)
        out = np.empty(self.n_dofs)
        out[self.free] = x_free
        out[self.fixed] = 0.0 if fixed_values is None else fixed_values
        return out


@dataclass
class ReducedSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    split: DofSplit
    fixed_values: np.ndarray | None

    def expand(self, x_free: np.ndarray) -> np.ndarray:
        return self.split.expand(x_free, self.fixed_values)


def apply_boundary(space: FeSpace, A, rhs: np.ndarray, bc: BoundaryCondition, t: float = 0.0) -> ReducedSystem:
    """Restrict ``A x = rhs`` to the unconstrained dofs.

    Natural and periodic conditions leave the system untouched (periodic
    identification already happened when the space was built).
    """
    split = DofSplit.build(space, bc)
    A_FF, A_FB = split.blocks(A)
    fixed_values = bc.values(space, t) if bc.is_dirichlet else None
    return ReducedSystem(A_FF, split.reduce_rhs(np.asarray(rhs, dtype=float), A_FB, fixed_values), split, fixed_values)
