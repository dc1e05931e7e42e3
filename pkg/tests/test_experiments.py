import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hydrolab import experiments as ex
from hydrolab.errors import ConfigError, DomainError

NAMES = {
    "profile", "selfsim", "wong", "uniqueness", "dispersion", "eigenfunction",
    "hadamard", "gevrey", "pde2d-blowup", "rotation-scaling", "cross-consistency",
}


def test_registry_names_are_fixed():
    assert set(ex.REGISTRY) == NAMES


def test_each_criterion_has_exactly_one_experiment():
    crit = [e.criterion for e in ex.REGISTRY.values() if e.criterion is not None]
    assert sorted(crit) == list(range(1, 11))


def test_fmt_uses_17_significant_digits():
    assert ex.fmt(0.1) == "0.10000000000000001"
    assert float(ex.fmt(math.pi)) == math.pi
    assert ex.fmt(3) == "3" and ex.fmt(True) == "true"


finite = st.floats(-1e6, 1e6, allow_nan=False).filter(lambda v: v != 0)


@given(st.sampled_from(sorted(NAMES)), st.integers(0, 2 ** 31), st.text("abcxyz_/", min_size=0, max_size=12))
def test_config_toml_round_trip(name, seed, out):
    cfg = ex.ExperimentConfig(name, ex.validate_parameters(name, {}), out, seed)
    assert ex.ExperimentConfig.from_toml(cfg.to_toml()) == cfg


@given(st.floats(0.01, 0.99))
def test_override_round_trip(alpha):
    cfg = ex.apply_overrides(ex.default_config("profile"), [ex.parse_override(f"alpha={alpha!r}")])
    assert cfg.parameters["alpha"] == alpha
    assert ex.ExperimentConfig.from_toml(cfg.to_toml()) == cfg


def test_override_parsing():
    assert ex.parse_override("n_list=[1, 2]") == ("n_list", [1, 2])
    assert ex.parse_override("run_2d=false") == ("run_2d", False)
    assert ex.parse_override("output_dir=abc") == ("output_dir", "abc")
    with pytest.raises(ConfigError):
        ex.parse_override("no_equals")


@pytest.mark.parametrize(
    "doc,fragment",
    [
        ({"experiment": "nope"}, "experiment"),
        ({"experiment": "profile", "extra": 1}, "unknown top-level"),
        ({"experiment": "profile", "parameters": {"bogus": 1}}, "bogus"),
        ({"experiment": "profile", "parameters": {"alpha": 1.5}}, "alpha"),
        ({"experiment": "profile", "parameters": {"n_nodes": 1.5}}, "n_nodes"),
        ({"experiment": "hadamard", "parameters": {"n_list": [1, "x"]}}, "n_list"),
        ({"experiment": "wong", "parameters": {"run_2d": 1}}, "run_2d"),
        ({"experiment": "profile", "seed": "a"}, "seed"),
    ],
)
def test_field_level_config_errors(doc, fragment):
    with pytest.raises(ConfigError) as info:
        ex.config_from_mapping(doc)
    assert fragment in str(info.value)


def test_invalid_toml_is_config_error():
    with pytest.raises(ConfigError):
        ex.ExperimentConfig.from_toml("experiment = ")


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        ex.load_config(tmp_path / "missing.toml")


def test_run_profile_writes_artifacts_and_is_deterministic(output_root):
    cfg = ex.apply_overrides(ex.default_config("profile"), [("alpha", 1.0 / 3.0)])
    a = ex.run(cfg, output_root / "a")
    b = ex.run(cfg, output_root / "b")
    assert a.passed and b.passed
    assert a.metrics["ode_residual"] <= 1e-6 and a.metrics["constraint_err"] <= 1e-6
    for name in ("metrics.csv", "profile_alpha0.333333.csv"):
        assert (output_root / "a" / name).read_bytes() == (output_root / "b" / name).read_bytes()
    assert (output_root / "a" / "config.toml").exists()
    assert (output_root / "a" / "result.json").exists()


def test_default_output_uses_env_root(output_root):
    cfg = ex.apply_overrides(ex.default_config("profile"), [("alpha", 0.5)])
    ex.run(cfg)
    assert (output_root / "profile" / "metrics.csv").exists()


def test_experiment_failure_is_recorded(output_root, monkeypatch):
    def broken(p, out, rng):
        raise DomainError("deliberate")

    exp = ex.REGISTRY["profile"]
    monkeypatch.setitem(ex.REGISTRY, "profile", ex.Experiment("profile", broken, exp.params, exp.manifest, 1))
    res = ex.run(ex.default_config("profile"), output_root / "x")
    assert not res.passed
    assert "DomainError in profile" in res.error


def test_sweep_rows_and_aggregate(output_root):
    res = ex.sweep(ex.default_config("profile"), "alpha", [0.25, 0.5], jobs=1)
    assert [r.config.parameters["alpha"] for r in res.rows] == [0.25, 0.5]
    assert res.passed
    lines = res.table.read_text().splitlines()
    assert lines[0].startswith("alpha,status,error")
    assert len(lines) == 3
    assert (res.table.parent / "alpha=0.25" / "metrics.csv").exists()


def test_sweep_is_order_independent(output_root):
    a = ex.sweep(ex.default_config("profile"), "alpha", [0.25, 0.5], output_dir=output_root / "a")
    b = ex.sweep(ex.default_config("profile"), "alpha", [0.5, 0.25], output_dir=output_root / "b")
    ma = {r.config.parameters["alpha"]: r.metrics for r in a.rows}
    mb = {r.config.parameters["alpha"]: r.metrics for r in b.rows}
    assert ma == mb


def test_sweep_parallel_matches_serial(output_root):
    a = ex.sweep(ex.default_config("profile"), "alpha", [0.25, 0.5], jobs=2, output_dir=output_root / "p")
    b = ex.sweep(ex.default_config("profile"), "alpha", [0.25, 0.5], jobs=1, output_dir=output_root / "s")
    assert [r.metrics for r in a.rows] == [r.metrics for r in b.rows]


def test_sweep_partial_failure_continues(output_root, monkeypatch):
    real = ex.REGISTRY["profile"]

    def flaky(p, out, rng):
        if p["alpha"] == 0.5:
            raise DomainError("row failure")
        return real.func(p, out, rng)

    monkeypatch.setitem(ex.REGISTRY, "profile", ex.Experiment("profile", flaky, real.params, real.manifest, 1))
    res = ex.sweep(ex.default_config("profile"), "alpha", [0.25, 0.5])
    assert res.rows[0].passed and not res.rows[1].passed
    assert "row failure" in res.table.read_text()


def test_sweep_axis_must_be_declared(output_root):
    with pytest.raises(ConfigError):
        ex.sweep(ex.default_config("profile"), "omega", [1.0])


def test_sweep_level_checks():
    def row(name, axis, v, metrics):
        cfg = ex.ExperimentConfig(name, {axis: v}, "", 0)
        return ex.ExperimentResult(cfg, metrics, {}, [], 0.0)

    good = [row("wong", "lambda", l, {"t_detect": 2.1 / l}) for l in (0.5, 1.0, 2.0)]
    assert all(ex._sweep_checks("wong", "lambda", good).values())
    bad = [row("wong", "lambda", l, {"t_detect": 2.1}) for l in (0.5, 1.0, 2.0)]
    assert not all(ex._sweep_checks("wong", "lambda", bad).values())
    betas = [row("dispersion", "d", d, {"beta": b}) for d, b in ((0.2, 0.44), (0.1, 0.73), (0.05, 0.87))]
    assert all(ex._sweep_checks("dispersion", "d", betas).values())


def test_emit_report(tmp_path):
    def fake(name, series):
        cfg = ex.default_config(name)
        return ex.ExperimentResult(cfg, {"beta_fit": 0.8, "linearity_dev": 0.01}, {"ok": True}, [], 1.0, series)

    s = ex.Series([1, 2, 4, 8], [5.0, 10.0, 20.0, 40.0], "n", "sigma_n", style="o",
                  overlay=([0, 8], [0.0, 40.0], "fit"))
    log = ex.Series([0.0, 0.5], [1.0, 100.0], "t", "sup", logy=True)
    files = ex.emit_report([fake("hadamard", {"sigma_vs_n": s}), fake("selfsim", {"sup": log})], tmp_path / "r")
    names = [f.name for f in files]
    assert "summary.csv" in names and "summary.md" in names
    svgs = [f for f in files if f.suffix == ".svg"]
    assert len(svgs) == 2 and all(f.read_text().lstrip().startswith("<?xml") for f in svgs)
    md = (tmp_path / "r" / "summary.md").read_text()
    assert "hadamard: PASS" in md and "linearity_dev" in md
    again = ex.emit_report([fake("hadamard", {"sigma_vs_n": s})], tmp_path / "r2")
    assert svgs[0].read_bytes() == again[1].read_bytes()


def test_emit_report_rejects_empty(tmp_path):
    with pytest.raises(DomainError):
        ex.emit_report([], tmp_path)


def test_emit_report_unwritable(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = ex.default_config("profile")
    with pytest.raises(ConfigError):
        ex.emit_report([ex.ExperimentResult(cfg, {}, {}, [], 0.0)], blocker / "sub")
