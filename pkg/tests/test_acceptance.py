"""End-to-end acceptance criteria 1-10.

Each test runs the registered experiment with its default configuration,
prints one PASS/FAIL line and then asserts the stated tolerances on the
reported metrics. Tolerances and oracles are restated here so that a change
in an experiment's own checks cannot silently relax them.
"""

import math

import pytest

from hydrolab import experiments as ex
from hydrolab import linstab as ls

pytestmark = pytest.mark.slow


def _run(name, tmp_path, **overrides):
    cfg = ex.apply_overrides(ex.default_config(name), list(overrides.items()))
    res = ex.run(cfg, tmp_path / name)
    assert not res.error, res.error
    return res


def _report(capsys, number, title, conditions, wall):
    ok = all(conditions.values())
    failed = [k for k, v in conditions.items() if not v]
    line = f"criterion {number:2d} {title}: {'PASS' if ok else 'FAIL'} ({wall:.2f} s)"
    if failed:
        line += " failed: " + "; ".join(failed)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def test_criterion_01_profile(tmp_path, capsys):
    res = _run("profile", tmp_path)
    m = res.metrics
    c_oracle = 1.0 / (math.pi * math.sqrt(2.0))
    _report(capsys, 1, "profile construction", {
        "ode residual <= 1e-6": m["ode_residual"] <= 1e-6,
        "|phi| at walls <= 1e-8": m["phi_boundary"] <= 1e-8,
        "|2 int psi^2 - m^2| <= 1e-6": m["constraint_err"] <= 1e-6,
        "|int psi| <= 1e-8": m["mean_psi"] <= 1e-8,
        "C(sqrt3/2) = 1/(pi sqrt2) to 1e-10": abs(m["c_m"] - c_oracle) <= 1e-10,
        "all three exponents": all(f"ode_residual[alpha={a:.6g}]" in m for a in (0.25, 1 / 3, 0.5)),
        "runtime < 10 s": res.wall_clock < 10.0,
    }, res.wall_clock)


def test_criterion_02_self_similar_blowup(tmp_path, capsys):
    res = _run("selfsim", tmp_path)
    m = res.metrics
    _report(capsys, 2, "self-similar blowup", {
        "sup |(1-t)W - phi| <= 1e-3 for t <= 0.9": m["self_similar_error"] <= 1e-3,
        "sup |V - Omega| <= 1e-12": m["v_deviation"] <= 1e-12,
        "extrapolated T in [0.98, 1.02]": 0.98 <= m["t_extrapolated"] <= 1.02,
        "runtime < 60 s": res.wall_clock < 60.0,
    }, res.wall_clock)


def test_criterion_03_wong_bound(tmp_path, capsys):
    res = _run("wong", tmp_path)
    m = res.metrics
    cond = {}
    for lam in (0.5, 1.0, 2.0):
        bound = 9.0 / (2.0 * lam)
        cond[f"reduced T <= 1.1*9/(2 lambda), lambda={lam:g}"] = m[f"t_detect[lambda={lam:g}]"] <= 1.1 * bound
        cond[f"2D T <= 1.1*9/(2 lambda), lambda={lam:g}"] = m[f"t_detect_2d[lambda={lam:g}]"] <= 1.1 * bound
    cond["pointwise lower bound to 1e-4"] = m["lower_bound_violation"] <= 1e-4
    cond["runtime < 5 min"] = res.wall_clock < 300.0
    _report(capsys, 3, "Wong bound", cond, res.wall_clock)


def test_criterion_04_rotation_scaling(tmp_path, capsys):
    res = _run("rotation-scaling", tmp_path)
    m = res.metrics
    _report(capsys, 4, "rotation scaling", {
        "blowup-time ratios within 15% of 1/lambda": m["max_ratio_dev"] <= 0.15,
        "runtime < 10 min": res.wall_clock < 600.0,
    }, res.wall_clock)


def test_criterion_05_dispersion(tmp_path, capsys):
    res = _run("dispersion", tmp_path)
    m = res.metrics
    a, b = ex.default_config("dispersion").parameters["a"], ex.default_config("dispersion").parameters["b"]
    closed = complex((a + b) / 2, abs(a - b) / 2)
    found = ls.find_roots(ls.ShearProfile.two_layer(a, b), (min(a, b) - 1, max(a, b) + 1, 0.05, 2.0))
    betas = [m[f"beta[d={d:g}]"] for d in (0.2, 0.1, 0.05, 0.025)]
    _report(capsys, 5, "dispersion relation", {
        "two-layer roots within 1e-8": m["two_layer_err"] <= 1e-8,
        "two-layer upper root vs closed form": len(found) == 1 and abs(found[0].c - closed) <= 1e-8,
        "tanh d=0.05 residual <= 1e-10": m["residual_d0.05"] <= 1e-10,
        "tanh d=0.05 |Re c| <= 1e-8": m["re_c_d0.05"] <= 1e-8,
        "beta increases toward 1 as d decreases": all(x < y for x, y in zip(betas, betas[1:])) and betas[-1] < 1.0,
        "runtime < 30 s": res.wall_clock < 30.0,
    }, res.wall_clock)


def test_criterion_06_eigenfunction(tmp_path, capsys):
    res = _run("eigenfunction", tmp_path)
    m = res.metrics
    _report(capsys, 6, "eigenfunction", {
        "|chi(1)| <= 1e-8 max|chi|": m["chi_top"] <= 1e-8,
        "ODE residual <= 1e-8 max|chi''|": m["ode_residual"] <= 1e-8,
        "eigenfunction construction < 5 s": m["chi_seconds"] < 5.0,
    }, m["chi_seconds"])


def test_criterion_07_hadamard(tmp_path, capsys):
    res = _run("hadamard", tmp_path)
    m = res.metrics
    beta = m["beta_root"]
    devs = [abs(m[f"sigma[n={n}]"] / (2 * math.pi * n * beta) - 1.0) for n in (1, 2, 4, 8)]
    _report(capsys, 7, "Hadamard growth law", {
        "sigma_n = 2 pi n beta_fit within 5%": m["linearity_dev"] <= 0.05,
        "beta_fit within 5% of root": m["beta_fit_err"] <= 0.05,
        "sigma_n within 5% of 2 pi n beta_root": max(devs) <= 0.05,
        "runtime < 2 min": res.wall_clock < 120.0,
    }, res.wall_clock)


def test_criterion_08_gevrey(tmp_path, capsys):
    res = _run("gevrey", tmp_path)
    m = res.metrics
    _report(capsys, 8, "ill-posedness and Gevrey diagnostics", {
        "log A(n, 0.1) linear in n within 10%": m["amp_slope_err"] <= 0.1 and m["amp_linearity"] <= 0.1,
        "planted (delta, s) within 5%": m["planted_err"] <= 0.05,
        "evolved s in [0.8, 1.2]": 0.8 <= m["s_final"] <= 1.2,
        "delta rate 2 pi beta within 20%": m["delta_rate_err"] <= 0.2,
        "runtime < 3 min": res.wall_clock < 180.0,
    }, res.wall_clock)


def test_criterion_09_cross_consistency(tmp_path, capsys):
    res = _run("cross-consistency", tmp_path)
    m = res.metrics
    _report(capsys, 9, "cross-solver consistency", {
        "restriction matches reduced within 1e-3": m["line_error"] <= 1e-3,
        "parity drift <= 1e-8": m["parity_drift"] <= 1e-8,
        "compatibility drift <= 1e-8": m["compat_drift"] <= 1e-8,
        "runtime < 3 min": res.wall_clock < 180.0,
    }, res.wall_clock)


def test_criterion_10_uniqueness(tmp_path, capsys):
    res = _run("uniqueness", tmp_path)
    m = res.metrics
    _report(capsys, 10, "uniqueness diagnostic", {
        "identical data D <= 1e-20": m["identical_separation"] <= 1e-20,
        "validation pair inside envelope": m["validation_ratio"] <= 1.0 + 1e-12,
        "runtime < 1 min": res.wall_clock < 60.0,
    }, res.wall_clock)
