import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlnac.errors import InvalidArgument
from dlnac.model import F, ModelParams, f, f_hat_css, f_tilde

reals = st.floats(-3.0, 3.0)


def test_potential_values():
    assert F(1.0) == 0.0 and F(-1.0) == 0.0
    assert F(0.0) == 0.25
    assert f(2.0) == 6.0


@given(reals, reals)
def test_secant_chain_rule(a, b):
    """f~(a, b) (a - b) = F(a) - F(b) exactly in exact arithmetic."""
    lhs = f_tilde(a, b) * (a - b)
    assert lhs == pytest.approx(F(a) - F(b), abs=1e-12)


@given(reals)
def test_secant_diagonal_is_derivative(a):
    assert f_tilde(a, a) == pytest.approx(f(a), abs=1e-13)


@given(reals, reals)
def test_secant_symmetric(a, b):
    assert f_tilde(a, b) == pytest.approx(f_tilde(b, a), rel=1e-14, abs=1e-15)


def test_secant_examples():
    assert f_tilde(1.0, 0.0) == pytest.approx(-0.25)  # (F(1) - F(0)) / 1
    assert f_tilde(2.0, 1.0) == pytest.approx(9.0 / 4.0)


@given(reals, reals)
def test_convex_split_with_implicit_extrapolation_is_secant(a, b):
    """With the explicit slot equal to the implicit one the convex-split
    quotient collapses to the full secant quotient."""
    assert f_hat_css(a, a, b) == pytest.approx(f_tilde(a, b), abs=1e-12)


def test_model_params_validation():
    with pytest.raises(InvalidArgument):
        ModelParams(0.0)
    with pytest.raises(InvalidArgument):
        ModelParams(float("nan"))
    assert ModelParams(0.1).forcing is None


def test_vectorized():
    a = np.linspace(-1, 1, 5)
    assert f_tilde(a, 0 * a).shape == (5,)
