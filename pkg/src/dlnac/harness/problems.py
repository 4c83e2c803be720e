"""The three benchmark problems."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import InvalidArgument
from ..fem import BoundaryCondition, FeSpace, build_mesh, interpolate

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Problem:
    """A test problem: domain, model parameter, data and (optionally) the
    exact solution ``exact(*x, t)`` with gradient ``exact_grad(*x, t)``."""

    name: str
    domain: tuple
    epsilon: float
    t_final: float
    bc_kind: str
    exact: Optional[Callable] = None
    exact_grad: Optional[Callable] = None
    forcing: Optional[Callable] = None
    initial: Optional[Callable] = None  # initial(space, rng) -> u0

    @property
    def dim(self) -> int:
        return 1 if np.ndim(self.domain[0]) == 0 else 2

    @property
    def periodic(self) -> bool:
        return self.bc_kind == "periodic"

    @property
    def length(self) -> float:
        """Side length (first axis)."""
        lo = self.domain[0] if self.dim == 1 else self.domain[0][0]
        hi = self.domain[1] if self.dim == 1 else self.domain[0][1]
        return hi - lo

    def space(self, n: int) -> FeSpace:
        return FeSpace(build_mesh(self.domain, n), periodic=self.periodic)

    def boundary(self) -> BoundaryCondition:
        if self.bc_kind == "dirichlet":
            return BoundaryCondition("dirichlet", self.exact)
        return BoundaryCondition(self.bc_kind)

    def exact_field(self, space: FeSpace, t: float) -> np.ndarray:
        if self.exact is None:
            raise InvalidArgument(f"{self.name} has no exact solution")
        return interpolate(space, self.exact, t)

    def initial_field(self, space: FeSpace, seed: int | None = None) -> np.ndarray:
        if self.initial is not None:
            return self.initial(space, np.random.default_rng(seed))
        return self.exact_field(space, 0.0)


def wave1d(epsilon: float = 0.01, t_final: float = 2.0) -> Problem:
    """Travelling front 0.5 (1 - tanh((x - s t) / (2 sqrt(2) eps))) on
    [-2, 4], speed s = 3 eps / sqrt(2), with its own Dirichlet data."""
    s = 3.0 * epsilon / math.sqrt(2.0)
    width = 2.0 * math.sqrt(2.0) * epsilon

    def exact(x, t):
        return 0.5 * (1.0 - np.tanh((x - s * t) / width))

    def exact_grad(x, t):
        return (-0.5 / width / np.cosh((x - s * t) / width) ** 2,)

    return Problem("wave1d", (-2.0, 4.0), epsilon, t_final, "dirichlet", exact, exact_grad)


def manufactured2d(epsilon: float = 0.01, t_final: float = 4.0) -> Problem:
    """0.05 exp(-0.1 t) sin x sin y on [0, 2 pi]^2 with the source that makes
    it an exact solution, homogeneous Dirichlet data."""
    amp = 0.05

    def exact(x, y, t):
        return amp * np.exp(-0.1 * t) * np.sin(x) * np.sin(y)

    def exact_grad(x, y, t):
        a = amp * np.exp(-0.1 * t)
        return (a * np.cos(x) * np.sin(y), a * np.sin(x) * np.cos(y))

    def forcing(x, y, t):
        u = exact(x, y, t)
        return (2.0 * epsilon**2 - 1.1) * u + u**3

    return Problem(
        "manufactured2d",
        ((0.0, TWO_PI), (0.0, TWO_PI)),
        epsilon,
        t_final,
        "dirichlet",
        exact,
        exact_grad,
        forcing,
    )


def random2d(epsilon: float = 0.1, t_final: float = 400.0) -> Problem:
    """Uniform noise 0.1 U(0,1) - 0.05 per dof on the periodic square."""

    def initial(space, rng):
        return 0.1 * rng.random(space.n_dofs) - 0.05

    return Problem(
        "random2d",
        ((0.0, TWO_PI), (0.0, TWO_PI)),
        epsilon,
        t_final,
        "periodic",
        initial=initial,
    )


PROBLEMS = {"wave1d": wave1d, "manufactured2d": manufactured2d, "random2d": random2d}


def get_problem(name: str, epsilon: float | None = None, t_final: float | None = None) -> Problem:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise InvalidArgument(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    kwargs = {}
    if epsilon is not None:
        kwargs["epsilon"] = epsilon
    if t_final is not None:
        kwargs["t_final"] = t_final
    return factory(**kwargs)
