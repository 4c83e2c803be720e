"""Plain-text field output: VTK legacy (2D) and CSV profiles (1D)."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .space import FeSpace

VTK_QUADRATIC_TRIANGLE = 22


def write_vtk(path, space: FeSpace, fields: dict[str, np.ndarray], title: str = "field"):
    """Quadratic-triangle unstructured grid with point scalars.

    Periodic spaces are written on the unwrapped node set so that the
    mesh closes up on the boundary.
    """
    if space.dim != 2:
        raise ValueError("VTK output is only provided for 2D spaces")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pts = space.full_coords
    cells = space.cell_dofs_full
    with path.open("w") as fh:
        fh.write(f"# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {pts.shape[0]} double\n")
        np.savetxt(fh, np.column_stack([pts, np.zeros(pts.shape[0])]), fmt="%.17g")
        fh.write(f"CELLS {cells.shape[0]} {cells.shape[0] * 7}\n")
        np.savetxt(fh, np.column_stack([np.full(cells.shape[0], 6), cells]), fmt="%d")
        fh.write(f"CELL_TYPES {cells.shape[0]}\n")
        np.savetxt(fh, np.full(cells.shape[0], VTK_QUADRATIC_TRIANGLE), fmt="%d")
        fh.write(f"POINT_DATA {pts.shape[0]}\n")
        for name, u in fields.items():
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            np.savetxt(fh, np.asarray(u)[space.full_to_dof], fmt="%.17g")
    return path


def write_profile_csv(path, space: FeSpace, fields: dict[str, np.ndarray]):
    """Columns x, <field names>, rows sorted by x."""
    if space.dim != 1:
        raise ValueError("profile output is only provided for 1D spaces")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    x = space.dof_coords[:, 0]
    order = np.argsort(x, kind="stable")
    names = list(fields)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", *names])
        for i in order:
            w.writerow([repr(float(x[i]))] + [repr(float(fields[n][i])) for n in names])
    return path
