import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlnac.coefficients import THETA_DLN, THETAS
from dlnac.errors import ConvergenceFailure, InvalidArgument
from dlnac.fem import BoundaryCondition, FeSpace, assemble_nonlinear_load, interpolate, interval_mesh
from dlnac.model import ModelParams, f_tilde
from dlnac.modified import FixedPointConfig, ModifiedDLNStepper, dissipation_residual_mod, energy_mod, step_modified
from dlnac.state import SchemeState

EPS = 0.1


def periodic_setup(n=16, seed=0):
    space = FeSpace(interval_mesh(0.0, 2 * np.pi, n), periodic=True)
    rng = np.random.default_rng(seed)
    x = space.dof_coords[:, 0]
    u0 = 0.5 * np.sin(x) + 0.05 * rng.standard_normal(space.n_dofs)
    u1 = u0 + 0.01 * rng.standard_normal(space.n_dofs)
    return space, u0, u1


def midpoint_oracle(space, u_prev, u_curr, k, k_prev, eps, tol):
    """Dense implicit midpoint with the same extrapolated initial guess."""
    M, K = space.mass.toarray(), space.stiffness.toarray()
    A = M / k + 0.5 * eps**2 * K
    base = M @ u_curr / k - 0.5 * eps**2 * K @ u_curr
    rho = k / k_prev
    u = (1 + rho) * u_curr - rho * u_prev
    for _ in range(200):
        load = assemble_nonlinear_load(space, f_tilde, u, u_curr)
        new = np.linalg.solve(A, base - load)
        d = new - u
        u = new
        if np.sqrt(d @ M @ d) <= tol:
            return u
    raise AssertionError("oracle did not converge")


@pytest.mark.parametrize("k_n", [0.05, 0.11])
def test_midpoint_degeneration(k_n):
    space, u0, u1 = periodic_setup()
    state = SchemeState(u1, u0, 0.05, 0.0)
    fp = FixedPointConfig(tol=1e-13)
    new, diag = ModifiedDLNStepper(space, ModelParams(EPS), 1.0, fp=fp).step(state, k_n)
    ref = midpoint_oracle(space, u0, u1, k_n, 0.05, EPS, 1e-13)
    assert np.max(np.abs(new.u_curr - ref)) <= 1e-13 * np.max(np.abs(ref))
    assert diag.k_hat == k_n


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("variant", ["secant", "convex_split"])
def test_energy_decreases_and_balance(theta, variant):
    space, u0, u1 = periodic_setup()
    st_ = ModifiedDLNStepper(space, ModelParams(EPS), theta, fp=FixedPointConfig(tol=1e-12), variant=variant)
    state = SchemeState(u1, u0, 0.1, 0.0)
    rng = np.random.default_rng(3)
    for _ in range(15):
        k = 0.1 * rng.uniform(0.3, 3.0)
        new, _ = st_.step(state, k)
        assert st_.energy(new) <= st_.energy(state) + 1e-11
        if variant == "secant":
            assert abs(st_.dissipation_residual(state, new)) < 1e-10
        state = new


def test_functional_wrappers_agree():
    space, u0, u1 = periodic_setup()
    p = ModelParams(EPS)
    state = SchemeState(u1, u0, 0.1, 0.0)
    new, _ = step_modified(space, state, 0.1, THETA_DLN, p)
    st_ = ModifiedDLNStepper(space, p, THETA_DLN)
    assert np.allclose(new.u_curr, st_.step(state, 0.1)[0].u_curr, atol=0)
    assert energy_mod(space, state, THETA_DLN, p) == st_.energy(state)
    assert dissipation_residual_mod(space, state, new, THETA_DLN, p) == pytest.approx(
        st_.dissipation_residual(state, new), abs=1e-14
    )


def test_constant_steps_reuse_one_factorization():
    space, u0, u1 = periodic_setup()
    st_ = ModifiedDLNStepper(space, ModelParams(EPS), THETA_DLN)
    state = SchemeState(u1, u0, 0.1, 0.0)
    for _ in range(10):
        state, _ = st_.step(state, 0.1)
    assert st_._cache.misses == 1


def test_dirichlet_values_are_imposed():
    space = FeSpace(interval_mesh(0.0, 1.0, 10))
    g = lambda x, t: 0.3 + 0.1 * t * x  # noqa: E731
    bc = BoundaryCondition("dirichlet", g)
    u0 = interpolate(space, g, 0.0)
    u1 = interpolate(space, g, 0.1)
    st_ = ModifiedDLNStepper(space, ModelParams(EPS), THETA_DLN, bc)
    new, _ = st_.step(SchemeState(u1, u0, 0.1, 0.0), 0.1)
    b = space.boundary_dofs
    assert np.allclose(new.u_curr[b], g(space.dof_coords[b, 0], 0.2), atol=1e-15)


def test_forcing_reproduces_linear_in_time_solution():
    """A spatially constant solution with its matching source term stays
    within the local truncation error of one step."""
    space = FeSpace(interval_mesh(0.0, 1.0, 8), periodic=True)
    exact = lambda x, t: 0.2 + 0.0 * x + 0.1 * t  # noqa: E731

    def forcing(x, t):
        u = exact(x, t)
        return 0.1 + u**3 - u

    st_ = ModifiedDLNStepper(space, ModelParams(EPS, forcing), 1.0, fp=FixedPointConfig(tol=1e-13))
    state = SchemeState(interpolate(space, exact, 0.1), interpolate(space, exact, 0.0), 0.1, 0.0)
    new, _ = st_.step(state, 0.1)
    assert np.max(np.abs(new.u_curr - interpolate(space, exact, 0.2))) < 1e-4


def test_convergence_failure_carries_iterate():
    space, u0, u1 = periodic_setup()
    st_ = ModifiedDLNStepper(space, ModelParams(EPS), THETA_DLN, fp=FixedPointConfig(tol=1e-14, max_iter=2))
    with pytest.raises(ConvergenceFailure) as err:
        st_.step(SchemeState(u1, u0, 0.1, 0.0), 0.1)
    assert err.value.last_iterate.shape == u0.shape
    assert err.value.increment > 1e-14


def test_invalid_configuration():
    space, _, _ = periodic_setup()
    with pytest.raises(InvalidArgument):
        ModifiedDLNStepper(space, ModelParams(EPS), 0.5, variant="other")
    with pytest.raises(InvalidArgument):
        FixedPointConfig(tol=0.0)


@given(st.floats(0.2, 5.0), st.sampled_from(THETAS))
def test_step_ratio_property(ratio, theta):
    """Energy never increases for any step ratio in the tested range."""
    space, u0, u1 = periodic_setup(n=8)
    st_ = ModifiedDLNStepper(space, ModelParams(EPS), theta, fp=FixedPointConfig(tol=1e-12))
    state = SchemeState(u1, u0, 0.05, 0.0)
    new, _ = st_.step(state, 0.05 * ratio)
    assert st_.energy(new) <= st_.energy(state) + 1e-11
