"""P2 Lagrange finite elements on structured interval and triangle meshes."""

from .assembly import (
    assemble_mass,
    assemble_nonlinear_load,
    assemble_source,
    assemble_stiffness,
    evaluate,
    evaluate_grad,
    integrate,
    interpolate,
)
from .boundary import BoundaryCondition, DofSplit, ReducedSystem, apply_boundary
from .io import write_profile_csv, write_vtk
from .mesh import Mesh, build_mesh, interval_mesh, rectangle_mesh
from .norms import discrete_time_norm, error_norm, h1_seminorm, l2_norm
from .quadrature import QuadratureRule, collapsed_triangle, default_rule, gauss_legendre
from .space import FeSpace, p2_basis

__all__ = [
    "BoundaryCondition",
    "DofSplit",
    "FeSpace",
    "Mesh",
    "QuadratureRule",
    "ReducedSystem",
    "apply_boundary",
    "assemble_mass",
    "assemble_nonlinear_load",
    "assemble_source",
    "assemble_stiffness",
    "build_mesh",
    "collapsed_triangle",
    "default_rule",
    "discrete_time_norm",
    "error_norm",
    "evaluate",
    "evaluate_grad",
    "gauss_legendre",
    "h1_seminorm",
    "integrate",
    "interpolate",
    "interval_mesh",
    "l2_norm",
    "p2_basis",
    "rectangle_mesh",
    "write_profile_csv",
    "write_vtk",
]
