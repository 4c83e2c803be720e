"""Structured interval and rectangle meshes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument


@dataclass(frozen=True)
class Mesh:
    dim: int
    vertices: np.ndarray  # (nv, dim)
    cells: np.ndarray  # (nc, dim + 1), counter-clockwise in 2D
    lower: tuple  # bounding box corners
    upper: tuple
    n_per_side: int

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def measure(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))

    @property
    def h(self) -> float:
        """Cell size along the first axis."""
        return (self.upper[0] - self.lower[0]) / self.n_per_side


def interval_mesh(a: float, b: float, n: int) -> Mesh:
    if not b > a:
        raise InvalidArgument(f"degenerate interval [{a}, {b}]")
    if n < 1:
        raise InvalidArgument("need at least one cell")
    x = np.linspace(a, b, n + 1)
    cells = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    return Mesh(1, x[:, None], cells, (a,), (b,), n)


def rectangle_mesh(x0: float, x1: float, y0: float, y1: float, n: int) -> Mesh:
    """n x n squares, each cut along its (lower-left, upper-right) diagonal
    into two triangles: 2 n^2 cells in total."""
    if not (x1 > x0 and y1 > y0):
        raise InvalidArgument(f"degenerate rectangle [{x0},{x1}]x[{y0},{y1}]")
    if n < 1:
        raise InvalidArgument("need at least one cell per side")
    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (n + 1) + j

    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i, j = i.ravel(), j.ravel()
    sw, se, nw, ne = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
    lower_tri = np.column_stack([sw, se, ne])
    upper_tri = np.column_stack([sw, ne, nw])
    cells = np.empty((2 * n * n, 3), dtype=np.int64)
    cells[0::2] = lower_tri
    cells[1::2] = upper_tri
    return Mesh(2, vertices, cells, (x0, y0), (x1, y1), n)


def build_mesh(domain, n: int) -> Mesh:
    """``domain`` is ``(a, b)`` for an interval or ``((x0, x1), (y0, y1))``
    for a rectangle; ``n`` cells per side."""
    if len(domain) == 2 and np.ndim(domain[0]) == 0:
        return interval_mesh(float(domain[0]), float(domain[1]), n)
    if len(domain) == 2 and len(domain[0]) == 2 and len(domain[1]) == 2:
        (x0, x1), (y0, y1) = domain
        return rectangle_mesh(float(x0), float(x1), float(y0), float(y1), n)
    raise InvalidArgument(f"unsupported domain {domain!r}")
