import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hydrolab import hydrostatic2d as h2d
from hydrolab import reduced as rd
from hydrolab.errors import DomainError, InvariantViolation, StabilityError
from hydrolab.linstab import ShearProfile, find_roots
from hydrolab.profile import build_profile


def _wong_parts(state, lam):
    x, z = state.grid.mesh()
    kappa = 2.0 * np.pi
    s, c = np.sin(kappa * x) / kappa, np.cos(kappa * x)
    g = 1.0 / 3.0 - z ** 2
    big_g = z / 3.0 - z ** 3 / 3.0
    return s, c, g, big_g


@pytest.mark.parametrize("lam,omega", [(1.0, 0.0), (0.7, 3.0), (2.0, -5.0)])
def test_wong_tendency_closed_form(lam, omega):
    # u = lam g S, v = -Omega S: the rotation term is balanced by pressure and
    # u_t = -lam^2 S C (g^2 + 2 z G - 8/45), v_t = Omega lam g S (C - 1)
    st_ = h2d.wong_field(lam, omega, 32, 17)
    s, c, g, big_g = _wong_parts(st_, lam)
    _, z = st_.grid.mesh()
    ut, vt = h2d.rhs2d(st_)
    np.testing.assert_allclose(ut, -lam ** 2 * s * c * (g ** 2 + 2 * z * big_g - 8.0 / 45.0), atol=1e-14)
    np.testing.assert_allclose(vt, omega * lam * g * s * (c - 1.0), atol=1e-14)


def test_pressure_gradient_closed_form():
    lam, omega = 1.3, 2.0
    st_ = h2d.wong_field(lam, omega, 32, 17)
    s, c, _, _ = _wong_parts(st_, lam)
    np.testing.assert_allclose(st_.p_x, -(8.0 / 45.0) * lam ** 2 * s * c - omega ** 2 * s, atol=1e-14)


def test_diagnosed_w():
    st_ = h2d.wong_field(1.0, 0.0, 32, 17)
    _, c, _, big_g = _wong_parts(st_, 1.0)
    np.testing.assert_allclose(st_.w, -c * big_g, atol=1e-14)


def test_incompatible_velocity_is_rejected():
    g = h2d.Grid2D(16, 9)
    x, _ = g.mesh()
    with pytest.raises(InvariantViolation):
        h2d.diagnose_w(np.sin(2 * np.pi * x), g)


def test_rest_and_shear_are_steady_without_rotation():
    r = h2d.rest_field()
    assert all(np.max(np.abs(f)) == 0.0 for f in h2d.rhs2d(r))
    g = h2d.Grid2D(16, 17)
    _, z = g.mesh()
    u = np.cos(np.pi * z)
    ut, vt = h2d.rhs2d(h2d.ChannelField(g, u, np.zeros_like(u), 0.0))
    assert np.max(np.abs(ut)) < 1e-14 and np.max(np.abs(vt)) < 1e-14


@given(st.floats(0.1, 4.0), st.floats(-4.0, 4.0), st.floats(0.2, 3.0))
def test_scaling_symmetry(lam, omega, scale):
    # (u, v, Omega) -> s (u, v, Omega) multiplies the tendencies by s^2
    base = h2d.wong_field(lam, omega, 16, 9)
    big = h2d.ChannelField(base.grid, scale * base.u, scale * base.v, scale * omega, "odd_uv")
    for a, b in zip(h2d.rhs2d(big), h2d.rhs2d(base)):
        np.testing.assert_allclose(a, scale ** 2 * b, atol=1e-12 * scale ** 2 * (1 + lam + abs(omega)) ** 2)


def test_invariants_along_short_run():
    traj, rep = h2d.simulate2d(h2d.wong_field(1.0, 2.0, 32, 33), 0.2, dt0=1e-3)
    assert not rep.blew_up
    assert np.max(traj.parity_drift) <= 1e-8
    assert np.max(traj.compat_drift) <= 1e-8
    assert np.max(np.abs(traj.energy / traj.energy[0] - 1.0)) <= 1e-6


def test_wong_data_lose_resolution_before_bound():
    traj, rep = h2d.simulate2d(h2d.wong_field(2.0, 1.0, 64, 33), 4.0, dt0=1e-3)
    assert rep.blew_up and rep.reason in ("resolution lost", "threshold exceeded")
    assert rep.t_detect <= 1.1 * 4.5 / 2.0


def test_restriction_matches_line_data():
    lam, omega = 1.5, 2.0
    st_ = h2d.wong_field(lam, omega, 32, 33)
    line = h2d.restrict_line(st_)
    ref = rd.wong_state(lam, omega, 33)
    np.testing.assert_allclose(line.w_field, ref.w_field, atol=1e-14)
    np.testing.assert_allclose(line.v_field, ref.v_field, atol=1e-13)


def test_self_similar_field_restricts_to_profile():
    prof = build_profile(1.0 / 3.0, 65, verify=False)
    line = h2d.restrict_line(h2d.self_similar_field(prof, 10.0, 32))
    # w is the spectral antiderivative of the Hoelder slope, close to phi only to ~1e-8
    np.testing.assert_allclose(line.w_field, prof.phi, atol=1e-7)
    np.testing.assert_allclose(line.v_field, 10.0, atol=1e-12)


def test_short_cross_solver_agreement():
    prof = build_profile(1.0 / 3.0, 65, verify=False)
    t2, _ = h2d.simulate2d(h2d.self_similar_field(prof, 10.0, 64), 0.05, 1e6, dt0=5e-4, save_times=[0.05], tail_tol=None)
    t1, _ = rd.simulate(rd.self_similar_state(prof, 10.0), 0.05, 1e6, dt0=1e-4, save_times=[0.05])
    line = h2d.restrict_line(t2.states[-1])
    assert np.max(np.abs(line.w_field - t1.states[-1].w_field)) < 1e-4


def test_restriction_requires_parity():
    g = h2d.Grid2D(16, 9)
    x, z = g.mesh()
    u = np.cos(2 * np.pi * x) * np.cos(np.pi * z)
    with pytest.raises(DomainError):
        h2d.restrict_line(h2d.ChannelField(g, u, 0 * u, 0.0, "none"))
    with pytest.raises(InvariantViolation):
        h2d.restrict_line(h2d.ChannelField(g, u, 0 * u, 0.0, "odd_uv"))


def test_field_validation():
    g = h2d.Grid2D(16, 9)
    with pytest.raises(DomainError):
        h2d.ChannelField(g, np.zeros((16, 8)), np.zeros((16, 9)), 0.0)
    with pytest.raises(DomainError):
        h2d.ChannelField(g, np.zeros((16, 9)), np.zeros((16, 9)), 0.0, "even")


def test_step_rejects_unstable_dt():
    st_ = h2d.wong_field(1.0, 1.0, 32, 17)
    with pytest.raises(StabilityError):
        h2d.step2d(st_, 10.0)


def test_snapshot_round_trip(tmp_path):
    st_ = h2d.wong_field(1.0, 2.0, 16, 9)
    back = h2d.read_snapshot(h2d.write_snapshot(st_, tmp_path / "s.bin"))
    np.testing.assert_array_equal(back.u, st_.u)
    np.testing.assert_array_equal(back.v, st_.v)
    assert back.omega == st_.omega and back.parity == st_.parity


@given(st.floats(0.1, 1.0), st.sampled_from([1.0, 1.5, 2.0]))
def test_planted_spectrum_recovered(delta, s):
    g = h2d.Grid2D(256, 5)
    x, z = g.mesh()
    f = np.zeros((g.nx, g.nz))
    for k in range(1, g.nx // 2):
        f += np.exp(-delta * k ** (1.0 / s)) * np.sin(2 * np.pi * k * x) * (1.0 + z)
    fit = h2d.spectral_decay_fit(f)
    assert fit.delta == pytest.approx(delta, rel=0.05)
    assert fit.s == pytest.approx(s, rel=0.05)


def test_decay_fit_needs_enough_modes():
    g = h2d.Grid2D(64, 5)
    x, _ = g.mesh()
    with pytest.raises(DomainError):
        h2d.spectral_decay_fit(np.sin(2 * np.pi * x))


def test_gevrey_field_modes():
    g = h2d.Grid2D(192, 9)
    assert h2d.gevrey_modes(0.5, g) == 59
    f = h2d.gevrey_field(0.5, g)
    amp = h2d.mode_amplitudes(f)
    # complex Fourier coefficient of a sine is half its amplitude
    assert amp[1] == pytest.approx(0.5 * np.exp(-0.5), rel=1e-12)
    assert amp[60] < 1e-15
    assert np.max(np.abs(g.zmean(f))) < 1e-14


def test_zero_perturbation_is_steady():
    g = h2d.Grid2D(32, 33)
    z0 = np.zeros((32, 33))
    ut, vt = h2d.perturbed_rhs(h2d.PerturbedField(g, z0, z0, ShearProfile.tanh(0.1), 1.0))
    assert np.max(np.abs(ut)) == 0.0 and np.max(np.abs(vt)) == 0.0


def test_linearization_error_is_quadratic():
    g = h2d.Grid2D(32, 33)
    x, z = g.mesh()
    # two vertical modes, so the quadratic terms are not a pure pressure gradient
    du = np.sin(2 * np.pi * x) * np.cos(np.pi * z) + np.sin(4 * np.pi * x) * np.cos(2 * np.pi * z)
    errs = []
    for eps in (1e-3, 1e-4):
        st_ = h2d.PerturbedField(g, eps * du, 0 * du, ShearProfile.tanh(0.1), 0.0)
        a = h2d.perturbed_rhs(st_)[0]
        b = h2d.linearized_rhs(st_)[0]
        errs.append(np.max(np.abs(a - b)))
    assert errs[0] / errs[1] == pytest.approx(100.0, rel=1e-3)


def test_sobolev_amplification():
    prof = ShearProfile.tanh(0.05)
    assert h2d.sobolev_amplification(prof, 4, 0.0) == 1.0
    with pytest.raises(DomainError):
        h2d.sobolev_amplification(prof, 4, -1.0)
    beta = max(r.beta for r in find_roots(prof, (-0.5, 0.5, 0.05, 2.0)))
    a8, a16 = (np.log(h2d.sobolev_amplification(prof, n, 0.1)) for n in (8, 16))
    assert (a16 - a8) / (8 * 2 * np.pi * beta * 0.1) == pytest.approx(1.0, rel=0.05)


def test_stable_profile_warns():
    with pytest.warns(RuntimeWarning):
        a = h2d.sobolev_amplification(ShearProfile.constant(0.0), 2, 0.5, n_nodes=65)
    assert a == pytest.approx(1.0, abs=1e-10)
