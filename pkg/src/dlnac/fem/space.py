"""Continuous P2 Lagrange space on a :class:`~dlnac.fem.mesh.Mesh`.

Local node order is (left, mid, right) on intervals and
(v0, v1, v2, e01, e12, e20) on triangles.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from ..errors import InvalidArgument
from .mesh import Mesh
from .quadrature import QuadratureRule, default_rule


def p2_basis(points: np.ndarray, dim: int):
    """Reference P2 basis values (nq, nloc) and gradients (nq, nloc, dim)."""
    if dim == 1:
        x = points[:, 0]
        vals = np.column_stack([(1 - x) * (1 - 2 * x), 4 * x * (1 - x), x * (2 * x - 1)])
        grads = np.column_stack([4 * x - 3, 4 - 8 * x, 4 * x - 1])[:, :, None]
        return vals, grads

    xi, eta = points[:, 0], points[:, 1]
    lam = np.stack([1 - xi - eta, xi, eta], axis=1)
    # d(lambda_i)/d(xi, eta)
    dlam = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    nq = points.shape[0]
    vals = np.empty((nq, 6))
    grads = np.empty((nq, 6, 2))
    for i in range(3):
        vals[:, i] = lam[:, i] * (2 * lam[:, i] - 1)
        grads[:, i, :] = (4 * lam[:, i] - 1)[:, None] * dlam[i]
    for loc, (i, j) in enumerate(((0, 1), (1, 2), (2, 0)), start=3):
        vals[:, loc] = 4 * lam[:, i] * lam[:, j]
        grads[:, loc, :] = 4 * (lam[:, j, None] * dlam[i] + lam[:, i, None] * dlam[j])
    return vals, grads


class FeSpace:
    """P2 space.  With ``periodic=True`` dofs on opposite sides of the
    bounding box are identified, so coefficient vectors are shorter than
    the unwrapped node list (:attr:`full_coords`)."""

    degree = 2

    def __init__(self, mesh: Mesh, periodic: bool = False, quadrature: QuadratureRule | None = None):
        self.mesh = mesh
        self.dim = mesh.dim
        self.periodic = periodic
        self.quadrature = quadrature or default_rule(mesh.dim)
        self._build_dofs()

    def _build_dofs(self):
        mesh = self.mesh
        nv = mesh.n_vertices
        if self.dim == 1:
            edges = mesh.cells
            cell_edges = np.arange(mesh.n_cells)[:, None]
        else:
            c = mesh.cells
            pairs = np.concatenate([c[:, [0, 1]], c[:, [1, 2]], c[:, [2, 0]]])
            pairs.sort(axis=1)
            edges, inverse = np.unique(pairs, axis=0, return_inverse=True)
            cell_edges = inverse.reshape(3, -1).T
        self.n_edges = edges.shape[0]
        edge_mid = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
        self.full_coords = np.concatenate([mesh.vertices, edge_mid])

        if self.dim == 1:
            v = mesh.cells
            self.cell_dofs_full = np.column_stack([v[:, 0], nv + cell_edges[:, 0], v[:, 1]])
        else:
            self.cell_dofs_full = np.concatenate([mesh.cells, nv + cell_edges], axis=1)

        if self.periodic:
            self.full_to_dof = self._periodic_map()
        else:
            self.full_to_dof = np.arange(self.full_coords.shape[0])
        self.n_dofs = int(self.full_to_dof.max()) + 1
        self.cell_dofs = self.full_to_dof[self.cell_dofs_full]
        # representative node of an identified class: its lowest unwrapped index
        order = np.argsort(self.full_to_dof, kind="stable")
        first = np.ones(order.size, dtype=bool)
        first[1:] = self.full_to_dof[order[1:]] != self.full_to_dof[order[:-1]]
        self.dof_coords = self.full_coords[order[first]]

    def _periodic_map(self):
        lo = np.asarray(self.mesh.lower, dtype=float)
        hi = np.asarray(self.mesh.upper, dtype=float)
        span = hi - lo
        # half-cell lattice coordinates are exact integers for these meshes
        spacing = span / (2 * self.mesh.n_per_side)
        idx = np.rint((self.full_coords - lo) / spacing).astype(np.int64)
        if np.max(np.abs(idx * spacing + lo - self.full_coords)) > 1e-9 * span.max():
            raise InvalidArgument("periodic identification needs a structured mesh")
        idx = np.mod(idx, 2 * self.mesh.n_per_side)
        _, inverse = np.unique(idx, axis=0, return_inverse=True)
        return inverse.ravel()

    # ------------------------------------------------------------------ geometry
    @cached_property
    def _geometry(self):
        mesh = self.mesh
        verts = mesh.vertices[mesh.cells]  # (nc, dim+1, dim)
        if self.dim == 1:
            det = verts[:, 1, 0] - verts[:, 0, 0]
            inv_jt = (1.0 / det)[:, None, None]
        else:
            J = np.stack([verts[:, 1] - verts[:, 0], verts[:, 2] - verts[:, 0]], axis=2)
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            inv_jt = np.empty_like(J)
            inv_jt[:, 0, 0] = J[:, 1, 1] / det
            inv_jt[:, 0, 1] = -J[:, 1, 0] / det
            inv_jt[:, 1, 0] = -J[:, 0, 1] / det
            inv_jt[:, 1, 1] = J[:, 0, 0] / det
        if np.any(det <= 0):
            raise InvalidArgument("mesh has non-positive cell measures")
        return det, inv_jt

    @property
    def cell_measure_factor(self) -> np.ndarray:
        """|det J| per cell."""
        return self._geometry[0]

    @cached_property
    def basis(self):
        return p2_basis(self.quadrature.points, self.dim)

    @cached_property
    def quad_weights(self) -> np.ndarray:
        """Physical weights (nc, nq)."""
        return self._geometry[0][:, None] * self.quadrature.weights[None, :]

    @cached_property
    def grad_basis(self) -> np.ndarray:
        """Physical basis gradients (nc, nq, nloc, dim)."""
        _, inv_jt = self._geometry
        _, ref_grads = self.basis
        return np.einsum("cde,qie->cqid", inv_jt, ref_grads)

    @cached_property
    def quad_points(self) -> np.ndarray:
        """Physical quadrature points (nc, nq, dim)."""
        verts = self.mesh.vertices[self.mesh.cells]
        ref = self.quadrature.points
        if self.dim == 1:
            return verts[:, 0, None, :] + ref[None, :, :] * (verts[:, 1] - verts[:, 0])[:, None, :]
        lam = np.column_stack([1 - ref[:, 0] - ref[:, 1], ref[:, 0], ref[:, 1]])
        return np.einsum("qv,cvd->cqd", lam, verts)

    @cached_property
    def eval_matrix(self):
        """Sparse map from dof values to values at all quadrature points
        (rows ordered cell-major), with its transpose for load scatters."""
        import scipy.sparse as sp

        phi, _ = self.basis
        nc, nloc = self.cell_dofs.shape
        nq = phi.shape[0]
        rows = np.repeat(np.arange(nc * nq), nloc)
        cols = np.repeat(self.cell_dofs, nq, axis=0).ravel()
        vals = np.tile(phi, (nc, 1)).ravel()
        E = sp.csr_matrix((vals, (rows, cols)), shape=(nc * nq, self.n_dofs))
        return E, E.T.tocsr()

    # ------------------------------------------------------------------ operators
    @cached_property
    def mass(self):
        from .assembly import assemble_mass

        return assemble_mass(self)

    @cached_property
    def stiffness(self):
        from .assembly import assemble_stiffness

        return assemble_stiffness(self)

    @cached_property
    def boundary_dofs(self) -> np.ndarray:
        """Dofs on the bounding-box boundary (empty for periodic spaces)."""
        if self.periodic:
            return np.zeros(0, dtype=np.int64)
        lo = np.asarray(self.mesh.lower)
        hi = np.asarray(self.mesh.upper)
        tol = 1e-10 * np.max(hi - lo)
        x = self.dof_coords
        on = np.any((np.abs(x - lo) < tol) | (np.abs(x - hi) < tol), axis=1)
        return np.flatnonzero(on)

    def coords_split(self, coords: np.ndarray | None = None):
        """Coordinate arrays as separate positional arguments for callables."""
        c = self.dof_coords if coords is None else coords
        return tuple(c[..., d] for d in range(self.dim))

    def __repr__(self):
        kind = "periodic " if self.periodic else ""
        return f"FeSpace({kind}P2, dim={self.dim}, cells={self.mesh.n_cells}, dofs={self.n_dofs})"
