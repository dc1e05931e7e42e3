import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from hydrolab import profile as pf
from hydrolab.errors import DomainError, InvariantViolation


@pytest.fixture(scope="module")
def prof():
    return pf.build_profile(1.0 / 3.0, 257)


def test_constant_at_sqrt3_over_2():
    # m = sqrt(3)/2 gives psi_plus = 3/2, psi_minus = -1/2, a = 3/4, b = 1/4,
    # and 1/B(3/4, 1/4) = sin(pi/4)/pi
    p = pf.params_from_m(math.sqrt(3.0) / 2.0)
    assert p.psi_plus == pytest.approx(1.5, abs=1e-15)
    assert p.psi_minus == pytest.approx(-0.5, abs=1e-15)
    assert p.c_m == pytest.approx(1.0 / (math.pi * math.sqrt(2.0)), abs=1e-10)
    assert p.alpha == pytest.approx(1.0 / 3.0, rel=1e-14)


@given(st.floats(0.05, 0.95))
def test_alpha_m_round_trip(alpha):
    p = pf.params_from_alpha(alpha)
    assert pf.alpha_from_m(p.m) == pytest.approx(alpha, rel=1e-12)
    assert p.psi_plus - p.psi_minus == pytest.approx(2.0 * math.sqrt(p.m ** 2 + 0.25), rel=1e-14)
    assert p.psi_plus + p.psi_minus == pytest.approx(1.0, abs=1e-14)
    assert p.c_m == pytest.approx(1.0 / special.beta(p.a, p.b), rel=1e-12)


@given(st.floats(0.1, 0.9), st.floats(0.0, 1.0))
def test_two_routes_for_z_of_psi_agree(alpha, frac):
    p = pf.params_from_alpha(alpha)
    psi = p.psi_minus + frac * p.spread
    assert pf.z_of_psi(psi, p) == pytest.approx(pf.z_of_psi_regularized(psi, p), abs=1e-12)


def test_z_of_psi_rejects_out_of_range():
    p = pf.params_from_alpha(0.5)
    with pytest.raises(DomainError):
        pf.z_of_psi(p.psi_plus + 0.1, p)


@pytest.mark.parametrize("alpha", [0.25, 1.0 / 3.0, 0.5])
def test_profile_diagnostics_within_tolerances(alpha):
    d = pf.build_profile(alpha, 257).diagnostics
    assert d["ode_residual"] <= 1e-6
    assert d["phi_boundary"] <= 1e-8
    assert d["constraint_error"] <= 1e-6
    assert d["mean_psi"] <= 1e-8
    assert d["monotonicity_violation"] == 0.0


def test_slope_endpoints_and_monotone(prof):
    p = prof.params
    assert prof.phi_prime[0] == pytest.approx(p.psi_plus, abs=1e-10)
    assert prof.phi_prime[-1] == pytest.approx(p.psi_minus, abs=1e-10)
    assert np.all(np.diff(prof.phi_prime) <= 0)


def test_phi_is_antiderivative_of_slope(prof):
    from hydrolab.cheb import cheb_grid

    g = cheb_grid(prof.n_nodes)
    # phi is Hoelder-smooth, so compare with a loose tolerance
    np.testing.assert_allclose(g.cumint @ prof.phi_prime, prof.phi, atol=1e-6)


def test_second_derivative_vanishes_at_walls(prof):
    assert prof.phi_double_prime[0] == 0.0
    assert prof.phi_double_prime[-1] == 0.0


def test_holder_exponent(prof):
    assert pf.holder_exponent_estimate(prof) == pytest.approx(1.0 / 3.0, abs=1e-3)


def test_holder_constant_matches_local_ratio():
    p = pf.params_from_alpha(0.5)
    # dpsi/dz vanishes at the wall and grows like z^alpha
    ratios = [abs(pf.dpsi_dz_of_z(z, p)) / z ** p.alpha for z in (1e-8, 1e-10)]
    assert ratios[1] == pytest.approx(pf.holder_constant(p), rel=1e-3)
    assert abs(ratios[1] - pf.holder_constant(p)) < abs(ratios[0] - pf.holder_constant(p))


def test_csv_round_trip(prof, tmp_path):
    path = prof.to_csv(tmp_path / "phi.csv")
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 1], prof.phi)
    assert path.with_suffix(".json").exists()


def test_invalid_alpha_and_grid():
    with pytest.raises(DomainError):
        pf.params_from_alpha(1.5)
    with pytest.raises(DomainError):
        pf.build_profile(0.3, 17)


def test_verify_reports_failures_on_coarse_grid():
    try:
        pf.build_profile(0.25, 33, verify=True)
    except InvariantViolation as exc:
        assert exc.failures
    coarse = pf.build_profile(0.25, 33, verify=False)
    assert "ode_residual" in coarse.diagnostics
