import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from hydrolab import specfun
from hydrolab.errors import DomainError

positive = st.floats(0.05, 8.0)
unit = st.floats(0.0, 1.0)


def test_ln_gamma_matches_known_values():
    # Gamma(1/2) = sqrt(pi), Gamma(5) = 24
    assert specfun.ln_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-15)
    assert specfun.ln_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-15)


def test_beta_closed_forms():
    assert specfun.beta(1.0, 1.0) == pytest.approx(1.0, rel=1e-15)
    assert specfun.beta(0.5, 0.5) == pytest.approx(math.pi, rel=1e-15)
    assert specfun.beta(2.0, 3.0) == pytest.approx(1.0 / 12.0, rel=1e-15)


@given(positive, positive)
def test_beta_against_scipy(a, b):
    assert specfun.beta(a, b) == pytest.approx(special.beta(a, b), rel=1e-12)
    assert specfun.ln_beta(a, b) == pytest.approx(special.betaln(a, b), rel=1e-12, abs=1e-13)


@given(unit, positive, positive)
def test_beta_reg_against_scipy(x, a, b):
    assert specfun.beta_reg(x, a, b) == pytest.approx(special.betainc(a, b, x), rel=1e-10, abs=1e-14)


@given(st.floats(1e-3, 1.0 - 1e-3), positive, positive)
def test_beta_reg_reflection(x, a, b):
    lhs = specfun.beta_reg(x, a, b)
    rhs = 1.0 - specfun.beta_reg(1.0 - x, b, a)
    assert lhs == pytest.approx(rhs, abs=1e-13)


@given(st.floats(0.0, 0.7), positive, positive)
def test_series_and_continued_fraction_agree(x, a, b):
    assert specfun.beta_reg_series(x, a, b) == pytest.approx(specfun.beta_reg(x, a, b), rel=1e-11, abs=1e-15)


@given(positive, positive)
def test_beta_reg_monotone(a, b):
    xs = np.linspace(0.0, 1.0, 41)
    vals = [specfun.beta_reg(float(x), a, b) for x in xs]
    assert all(v1 <= v2 + 1e-15 for v1, v2 in zip(vals[:-1], vals[1:]))
    assert vals[0] == 0.0 and vals[-1] == 1.0


@given(unit, positive, positive)
def test_beta_inc_is_unregularized(x, a, b):
    ref = special.betainc(a, b, x) * special.beta(a, b)
    assert specfun.beta_inc(x, a, b) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def test_beta_reg_symmetric_midpoint():
    # I(1/2; a, a) = 1/2 by symmetry
    for a in (0.1, 1.0, 7.5):
        assert specfun.beta_reg(0.5, a, a) == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize(
    "call",
    [
        lambda: specfun.ln_gamma(0.0),
        lambda: specfun.beta(-1.0, 1.0),
        lambda: specfun.beta_reg(1.5, 1.0, 1.0),
        lambda: specfun.beta_reg(0.5, 0.0, 1.0),
        lambda: specfun.beta_inc(-0.1, 1.0, 1.0),
        lambda: specfun.gauss_jacobi(0, 0.0, 0.0),
        lambda: specfun.gauss_jacobi(5, -1.0, 0.0),
    ],
)
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


@given(st.floats(-0.9, 3.0), st.floats(-0.9, 3.0), st.integers(1, 30))
def test_gauss_jacobi_matches_scipy(left, right, n):
    rule = specfun.gauss_jacobi(n, left, right)
    # scipy's rule lives on [-1, 1] with weight (1-x)^alpha (1+x)^beta
    x, w = special.roots_jacobi(n, right, left)
    t = 0.5 * (1.0 + x)
    w = w / 2.0 ** (left + right + 1.0)
    np.testing.assert_allclose(np.sort(rule.nodes), np.sort(t), atol=1e-12)
    np.testing.assert_allclose(rule.weights.sum(), w.sum(), rtol=1e-12)


@pytest.mark.parametrize("left,right", [(-0.5, 0.0), (-0.25, 1.5), (0.0, -0.75), (2.0, 2.0)])
def test_gauss_jacobi_exact_for_polynomials(left, right):
    n = 8
    rule = specfun.gauss_jacobi(n, left, right)
    for k in range(2 * n):
        # int_0^1 t^k t^left (1-t)^right dt = B(k + left + 1, right + 1)
        exact = special.beta(k + left + 1.0, right + 1.0)
        assert rule.integrate(lambda t: t ** k) == pytest.approx(exact, rel=1e-13)


def test_gauss_jacobi_arrays_are_read_only():
    rule = specfun.gauss_jacobi(6, -0.5, 0.0)
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0
