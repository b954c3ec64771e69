import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nilreturn.errors import InterpolationFailure, NonInvertibleLeadingCoefficient
from nilreturn.xifunc import XiFunction, lobatto_nodes

CHECK = np.linspace(0.0, 1.0, 257)


def test_nodes_ascending_with_endpoints():
    x = lobatto_nodes(8)
    assert x[0] == 0.0 and x[-1] == 1.0
    assert np.all(np.diff(x) > 0)


def test_polynomial_is_exact_at_low_degree():
    f = XiFunction.from_callable(lambda x: 3 * x**4 - x + 2)
    assert f.degree <= 8
    np.testing.assert_allclose(f(CHECK), 3 * CHECK**4 - CHECK + 2, atol=1e-14)


@pytest.mark.parametrize("fn", [np.exp, np.cos, lambda x: np.sqrt(2 - x * x), lambda x: 1 / (1.5 - x)])
def test_smooth_functions_meet_tolerance(fn):
    f = XiFunction.from_callable(fn)
    err = np.max(np.abs(f(CHECK) - fn(CHECK)))
    assert err <= 1e-12 * np.max(np.abs(fn(CHECK)))


def test_degree_cap_raises():
    with pytest.raises(InterpolationFailure):
        XiFunction.from_callable(lambda x: np.abs(x - 0.3), max_degree=64)


def test_arithmetic():
    a = XiFunction.from_callable(lambda x: 1 + x)
    b = XiFunction.from_callable(lambda x: 2 - x * x)
    np.testing.assert_allclose((a * b)(CHECK), (1 + CHECK) * (2 - CHECK**2), atol=1e-14)
    np.testing.assert_allclose((a + b)(CHECK), 3 + CHECK - CHECK**2, atol=1e-14)
    np.testing.assert_allclose((a - 2.0)(CHECK), CHECK - 1, atol=1e-14)
    np.testing.assert_allclose((a**3)(CHECK), (1 + CHECK) ** 3, atol=1e-13)
    np.testing.assert_allclose((1.0 / b)(CHECK), 1 / (2 - CHECK**2), atol=1e-12)


def test_sqrt_needs_positive_minimum():
    b = XiFunction.from_callable(lambda x: 2 - x * x)
    np.testing.assert_allclose(b.sqrt()(CHECK), np.sqrt(2 - CHECK**2), atol=1e-12)
    with pytest.raises(NonInvertibleLeadingCoefficient):
        XiFunction.from_callable(lambda x: x * x).sqrt()


@settings(max_examples=30)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=12))
def test_random_polynomials_interpolated(c):
    poly = np.polynomial.Polynomial(c)
    f = XiFunction.from_callable(poly)
    scale = max(1.0, np.max(np.abs(poly(CHECK))))
    assert np.max(np.abs(f(CHECK) - poly(CHECK))) <= 1e-12 * scale
