"""Direct sparse solves for the symmetric positive-definite systems of the
steppers.

SuperLU is run in symmetric mode (diagonal pivots, symmetric fill-reducing
ordering), so the pivots of U are those of a symmetric LDL^T factorization
and any non-positive pivot exposes a matrix that is not SPD.
"""

from __future__ import annotations

from collections import OrderedDict
from typing import Hashable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DecompositionFailure, InvalidArgument, NumericalFailure

RESIDUAL_TOL = 1e-12
_TINY = np.finfo(float).tiny
MAX_REFINEMENT = 3
#: Pivots below this fraction of the largest diagonal entry count as zero.
PIVOT_RTOL = 1e-10


class Factorization:
    """Reusable factorization of one sparse SPD matrix."""

    def __init__(self, matrix):
        A = sp.csc_matrix(matrix, dtype=float)
        if A.shape[0] != A.shape[1]:
            raise InvalidArgument(f"matrix must be square, got {A.shape}")
        self.matrix = A.tocsr()
        self.shape = A.shape
        self.n_refinements = 0
        if A.shape[0] == 0:
            self._lu = None
            return
        try:
            lu = spla.splu(
                A,
                permc_spec="MMD_AT_PLUS_A",
                diag_pivot_thresh=0.0,
                options=dict(SymmetricMode=True),
            )
        except RuntimeError as exc:  # exactly singular
            raise DecompositionFailure(f"factorization failed: {exc}") from exc
        pivots = lu.U.diagonal()
        scale = float(np.max(np.abs(A.diagonal()), initial=0.0))
        bad = np.flatnonzero(~(pivots > PIVOT_RTOL * scale))
        if bad.size:
            i = int(bad[0])
            raise DecompositionFailure(
                f"pivot {pivots[i]:.3e} at position {i} is not safely positive "
                f"(diagonal scale {scale:.3e}); matrix is not SPD",
                pivot_index=i,
                pivot_value=float(pivots[i]),
            )
        self._lu = lu

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self._solve(rhs)
        # Triangular solves smear values far below any tolerance across the
        # whole domain; subnormal floats make later sparse products ~10x
        # slower, so they are flushed to zero.
        x[np.abs(x) < _TINY] = 0.0
        return x

    def _solve(self, rhs: np.ndarray) -> np.ndarray:
        b = np.asarray(rhs, dtype=float)
        if b.shape != (self.shape[0],):
            raise InvalidArgument(f"rhs has shape {b.shape}, expected ({self.shape[0]},)")
        if self._lu is None:
            return np.zeros(0)
        x = self._lu.solve(b)
        bnorm = np.linalg.norm(b)
        if bnorm == 0.0:
            return x
        for _ in range(MAX_REFINEMENT):
            r = b - self.matrix @ x
            if np.linalg.norm(r) <= RESIDUAL_TOL * bnorm:
                return x
            x = x + self._lu.solve(r)
            self.n_refinements += 1
        r = b - self.matrix @ x
        rel = np.linalg.norm(r) / bnorm
        # Refinement stagnates at the conditioning floor; only give up on
        # genuinely broken solves.
        if not np.isfinite(rel) or rel > 1e-8:
            raise NumericalFailure(f"relative residual {rel:.3e} after refinement")
        return x


def factorize(matrix) -> Factorization:
    return Factorization(matrix)


def solve(fact: Factorization, rhs: np.ndarray) -> np.ndarray:
    return fact.solve(rhs)


class FactorizationCache:
    """Small LRU cache keyed on step parameters.

    ``build`` returns the object to store, typically a :class:`Factorization`
    or a tuple holding one.  A changed step size gives a new key, so stale
    factorizations are never reused.
    """

    def __init__(self, maxsize: int = 4):
        self.maxsize = maxsize
        self._store: OrderedDict = OrderedDict()
        self.misses = 0

    def get(self, key: Hashable, build):
        if key in self._store:
            self._store.move_to_end(key)
            return self._store[key]
        self.misses += 1
        value = build()
        self._store[key] = value
        if len(self._store) > self.maxsize:
            self._store.popitem(last=False)
        return value

    def clear(self):
        self._store.clear()
