"""Quadrature rules on the reference interval [0, 1] and reference triangle
{(xi, eta): xi, eta >= 0, xi + eta <= 1}."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (nq, dim)
    weights: np.ndarray  # (nq,), sums to the reference measure
    degree: int  # total polynomial degree integrated exactly


def gauss_legendre(n: int = 5) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(n)
    return QuadratureRule(points=(0.5 * (x + 1.0))[:, None], weights=0.5 * w, degree=2 * n - 1)


def collapsed_triangle(n: int = 5) -> QuadratureRule:
    """Tensor Gauss-Legendre x Gauss-Jacobi(1, 0) rule mapped through the
    Duffy collapse; exact for total degree 2n - 1."""
    xa, wa = np.polynomial.legendre.leggauss(n)
    xb, wb = roots_jacobi(n, 1.0, 0.0)
    a = 0.5 * (xa + 1.0)
    b = 0.5 * (xb + 1.0)
    A, B = np.meshgrid(a, b, indexing="ij")
    WA, WB = np.meshgrid(0.5 * wa, 0.25 * wb, indexing="ij")
    xi = (A * (1.0 - B)).ravel()
    eta = B.ravel()
    return QuadratureRule(points=np.column_stack([xi, eta]), weights=(WA * WB).ravel(), degree=2 * n - 1)


def default_rule(dim: int) -> QuadratureRule:
    # degree >= 8: u^3 * psi with P2 fields is integrated exactly
    return gauss_legendre(5) if dim == 1 else collapsed_triangle(5)
