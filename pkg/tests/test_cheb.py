import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hydrolab.cheb import cheb_grid, clenshaw_curtis_weights, lobatto_nodes
from hydrolab.errors import DomainError


def test_nodes_cover_unit_interval_increasing():
    z = lobatto_nodes(17)
    assert z[0] == 0.0 and z[-1] == 1.0
    assert np.all(np.diff(z) > 0)


@given(st.integers(3, 64), st.integers(0, 10))
def test_differentiation_exact_for_polynomials(n, k):
    if k >= n:
        k = n - 1
    g = cheb_grid(n)
    f = g.z ** k
    exact = k * g.z ** (k - 1) if k > 0 else np.zeros_like(g.z)
    np.testing.assert_allclose(g.diff @ f, exact, atol=1e-10 * max(1, k * k))


@given(st.integers(3, 64))
def test_weights_integrate_polynomials(n):
    g = cheb_grid(n)
    for k in range(min(n, 12)):
        assert g.integrate(g.z ** k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


def test_weights_sum_to_one_and_positive():
    w = clenshaw_curtis_weights(33)
    assert w.sum() == pytest.approx(1.0, rel=1e-15)
    assert np.all(w > 0)


def test_cumint_is_antiderivative_from_zero():
    g = cheb_grid(33)
    f = np.cos(3.0 * g.z)
    np.testing.assert_allclose(g.cumint @ f, np.sin(3.0 * g.z) / 3.0, atol=1e-14)
    assert (g.cumint @ f)[0] == 0.0


def test_second_derivative_of_smooth_function():
    g = cheb_grid(41)
    np.testing.assert_allclose(g.diff2 @ np.exp(g.z), np.exp(g.z), atol=1e-9)


def test_cached_arrays_are_read_only():
    g = cheb_grid(9)
    with pytest.raises(ValueError):
        g.diff[0, 0] = 1.0


def test_too_few_nodes():
    with pytest.raises(DomainError):
        cheb_grid(2)
