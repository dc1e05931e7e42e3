"""Experiment registry, configuration, runs, sweeps and reports."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np
import tomli
import tomli_w

from . import hydrostatic2d as h2d
from . import linstab as ls
from . import reduced as rd
from .cheb import cheb_grid
from .errors import ConfigError, DomainError, HydrolabError
from .profile import build_profile, holder_exponent_estimate

OUTPUT_ROOT_ENV = "HYDROLAB_OUTPUT_ROOT"
DEFAULT_OUTPUT_ROOT = "hydrolab-output"


def fmt(value) -> str:
    """Numbers at 17 significant digits; everything else via str."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


# --- parameters ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    kind: str  # float, int, bool, str, float_list, int_list
    default: Any
    doc: str
    check: Callable[[Any], bool] | None = None
    rule: str = ""


def _coerce(name: str, p: Param, value):
    def bad(msg):
        return ConfigError(f"parameter {name!r}: {msg}")

    if p.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad(f"expected a number, got {value!r}")
        value = float(value)
    elif p.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad(f"expected an integer, got {value!r}")
    elif p.kind == "bool":
        if not isinstance(value, bool):
            raise bad(f"expected true/false, got {value!r}")
    elif p.kind == "str":
        if not isinstance(value, str):
            raise bad(f"expected a string, got {value!r}")
    elif p.kind in ("float_list", "int_list"):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, list) or not value:
            raise bad(f"expected a non-empty list, got {value!r}")
        out = []
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise bad(f"list entries must be numbers, got {item!r}")
            if p.kind == "int_list":
                if not isinstance(item, int):
                    raise bad(f"list entries must be integers, got {item!r}")
                out.append(int(item))
            else:
                out.append(float(item))
        value = out
    if p.check is not None:
        items = value if isinstance(value, list) else [value]
        if not all(p.check(v) for v in items):
            raise bad(f"{value!r} violates {p.rule}")
    return value


def _positive(x) -> bool:
    return x > 0


def _unit_open(x) -> bool:
    return 0 < x < 1


# --- configuration -----------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    parameters: dict
    output_dir: str = ""
    seed: int = 0

    def to_toml(self) -> str:
        params = {k: v for k, v in self.parameters.items() if v is not None}
        doc = {"experiment": self.experiment, "seed": self.seed, "parameters": params}
        if self.output_dir:
            doc["output_dir"] = self.output_dir
        return tomli_w.dumps(doc)

    @classmethod
    def from_toml(cls, text: str) -> "ExperimentConfig":
        try:
            doc = tomli.loads(text)
        except tomli.TOMLDecodeError as exc:
            raise ConfigError(f"invalid TOML: {exc}") from exc
        return config_from_mapping(doc)

    def resolved_output(self) -> Path:
        out = Path(self.output_dir or self.experiment)
        if out.is_absolute():
            return out
        return Path(os.environ.get(OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT)) / out


def config_from_mapping(doc: dict) -> ExperimentConfig:
    unknown = set(doc) - {"experiment", "parameters", "output_dir", "seed"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    name = doc.get("experiment")
    if name not in REGISTRY:
        raise ConfigError(f"experiment: unknown name {name!r}; choose from {sorted(REGISTRY)}")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")
    out = doc.get("output_dir", "")
    if not isinstance(out, str):
        raise ConfigError(f"output_dir: expected a string, got {out!r}")
    params = validate_parameters(name, doc.get("parameters", {}))
    return ExperimentConfig(name, params, out, seed)


def validate_parameters(name: str, given: dict) -> dict:
    spec = REGISTRY[name].params
    if not isinstance(given, dict):
        raise ConfigError("parameters must be a table")
    unknown = set(given) - set(spec)
    if unknown:
        raise ConfigError(f"{name}: unknown parameters {sorted(unknown)}; allowed {sorted(spec)}")
    out = {}
    for key, p in spec.items():
        value = given.get(key, p.default)
        out[key] = None if value is None else _coerce(key, p, value)
    return out


def parse_override(text: str):
    """``key=value`` with the value read as a TOML literal, else a bare string."""
    if "=" not in text:
        raise ConfigError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        value = tomli.loads(f"v = {raw.strip()}")["v"]
    except tomli.TOMLDecodeError:
        value = raw.strip()
    return key, value


def apply_overrides(config: ExperimentConfig, overrides) -> ExperimentConfig:
    doc = {"experiment": config.experiment, "seed": config.seed,
           "output_dir": config.output_dir, "parameters": dict(config.parameters)}
    for key, value in overrides:
        if key in ("seed", "output_dir", "experiment"):
            doc[key] = value
        else:
            key = key.removeprefix("parameters.")
            doc["parameters"][key] = value
    return config_from_mapping(doc)


def load_config(path, overrides=()) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return apply_overrides(ExperimentConfig.from_toml(text), overrides)


# --- results ------------------------------------------------------------------------------


@dataclass
class Series:
    """A recorded curve for the report plots."""

    x: list
    y: list
    xlabel: str
    ylabel: str
    logy: bool = False
    overlay: tuple | None = None  # (x, y, label)
    style: str = "-"


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    metrics: dict
    checks: dict
    artifacts: list
    wall_clock: float
    series: dict = field(default_factory=dict)
    error: str = ""

    @property
    def passed(self) -> bool:
        return not self.error and all(self.checks.values())

    def to_json(self) -> str:
        return json.dumps({
            "config": asdict(self.config),
            "metrics": {k: _jsonable(v) for k, v in self.metrics.items()},
            "checks": self.checks,
            "artifacts": self.artifacts,
            "wall_clock": self.wall_clock,
            "error": self.error,
        }, indent=2)


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


@dataclass(frozen=True)
class Experiment:
    name: str
    func: Callable
    params: dict
    manifest: dict  # metric -> description of the checked claim
    criterion: int | None = None


REGISTRY: dict[str, Experiment] = {}


def register(name: str, params: dict, manifest: dict, criterion: int | None = None):
    def deco(func):
        REGISTRY[name] = Experiment(name, func, params, manifest, criterion)
        return func
    return deco


def _tag(name: str, key, value) -> str:
    return f"{name}[{key}={value:.6g}]"


# --- experiments --------------------------------------------------------------------------

C_SQRT3_HALF = 1.0 / (math.pi * math.sqrt(2.0))


@register(
    "profile",
    {
        "alpha": Param("float", None, "single Hoelder exponent (overrides alpha_list)", _unit_open, "0 < alpha < 1"),
        "alpha_list": Param("float_list", [0.25, 1.0 / 3.0, 0.5], "Hoelder exponents", _unit_open, "0 < alpha < 1"),
        "n_nodes": Param("int", 257, "Chebyshev nodes", lambda n: n >= 33, "n >= 33"),
    },
    {
        "ode_residual": "max interior residual of the profile boundary value problem",
        "phi_boundary": "max |phi(0)|, |phi(1)|",
        "constraint_err": "|2 int psi^2 - m^2|",
        "mean_psi": "|int psi|",
        "c_m_err": "|C(sqrt(3)/2) - 1/(pi sqrt 2)|",
        "holder_err": "max |fitted Hoelder exponent of phi'' at z = 0 minus alpha|",
    },
    criterion=1,
)
def _exp_profile(p, out: Path, rng):
    alphas = [p["alpha"]] if p["alpha"] is not None else p["alpha_list"]
    metrics, checks, arts = {}, {}, []
    worst = {"ode_residual": 0.0, "phi_boundary": 0.0, "constraint_err": 0.0, "mean_psi": 0.0, "holder_err": 0.0}
    for a in alphas:
        prof = build_profile(a, p["n_nodes"], verify=False)
        d = prof.diagnostics
        vals = {
            "ode_residual": d["ode_residual"],
            "phi_boundary": d["phi_boundary"],
            "constraint_err": d["constraint_error"],
            "mean_psi": d["mean_psi"],
            "holder_err": abs(holder_exponent_estimate(prof) - a),
        }
        for k, v in vals.items():
            metrics[_tag(k, "alpha", a)] = v
            worst[k] = max(worst[k], v)
        arts.append(str(prof.to_csv(out / f"profile_alpha{a:.6f}.csv")))
    metrics.update(worst)
    from .profile import params_from_m

    metrics["c_m"] = params_from_m(math.sqrt(3.0) / 2.0).c_m
    metrics["c_m_err"] = abs(metrics["c_m"] - C_SQRT3_HALF)
    checks["ode_residual <= 1e-6"] = worst["ode_residual"] <= 1e-6
    checks["phi_boundary <= 1e-8"] = worst["phi_boundary"] <= 1e-8
    checks["constraint_err <= 1e-6"] = worst["constraint_err"] <= 1e-6
    checks["mean_psi <= 1e-8"] = worst["mean_psi"] <= 1e-8
    checks["c_m_err <= 1e-10"] = metrics["c_m_err"] <= 1e-10
    return metrics, checks, arts, {}


@register(
    "selfsim",
    {
        "alpha": Param("float", 1.0 / 3.0, "profile Hoelder exponent", _unit_open, "0 < alpha < 1"),
        "omega": Param("float", 10.0, "rotation rate"),
        "n_nodes": Param("int", 129, "Chebyshev nodes", lambda n: n >= 33, "n >= 33"),
        "dt": Param("float", 1e-4, "maximal time step", _positive, "dt > 0"),
        "threshold": Param("float", 1e6, "blowup threshold on sup|W_z|", _positive, "> 0"),
        "t_end": Param("float", 1.2, "final time", _positive, "> 0"),
    },
    {
        "self_similar_error": "max_{t<=0.9} sup_z |(1-t) W - phi|",
        "v_deviation": "sup_t sup_z |V - Omega|",
        "t_extrapolated": "singularity time from the 1/sup|W_z| fit (exact value 1)",
        "t_detect": "time sup|W_z| crossed the threshold",
        "compat_defect": "max_{t<=0.9} |int W_tz| relative to sup|W_tz|",
    },
    criterion=2,
)
def _exp_selfsim(p, out: Path, rng):
    prof = build_profile(p["alpha"], p["n_nodes"], verify=False)
    init = rd.self_similar_state(prof, p["omega"])
    save = np.round(np.arange(0.05, 0.9 + 1e-9, 0.05), 10)
    traj, rep = rd.simulate(init, p["t_end"], p["threshold"], dt0=p["dt"], save_times=save)
    early = traj.times <= 0.9 + 1e-12
    wt_scale = np.maximum(1.0, traj.sup_wz[early] ** 2)
    metrics = {
        "self_similar_error": rd.self_similar_error(traj, prof, 0.9),
        "v_deviation": max(float(np.max(np.abs(s.v_field - p["omega"]))) for s in traj.states),
        "t_detect": rep.t_detect,
        "t_extrapolated": rep.t_extrapolated,
        "compat_defect": float(np.max(traj.compat_defect[early] / wt_scale)),
    }
    checks = {
        "self_similar_error <= 1e-3": metrics["self_similar_error"] <= 1e-3,
        "v_deviation <= 1e-12": metrics["v_deviation"] <= 1e-12,
        "t_extrapolated in [0.98, 1.02]": 0.98 <= metrics["t_extrapolated"] <= 1.02,
    }
    traj.to_jsonl(out / "trajectory.jsonl")
    (out / "blowup.json").write_text(rep.to_json() + "\n")
    inv_gap = 1.0 / (1.0 - traj.times)
    series = {
        "sup_wz_vs_inverse_gap": Series(
            list(inv_gap), list(traj.sup_wz), "1/(1-t)", "sup|W_z|",
            overlay=(list(inv_gap), list(traj.sup_wz[0] * inv_gap), "sup|W_z(0)|/(1-t)"),
        )
    }
    return metrics, checks, [str(out / "trajectory.jsonl"), str(out / "blowup.json")], series


def _wong_reduced(lam, omega, n_nodes, dt, threshold):
    init = rd.wong_state(lam, omega, n_nodes)
    traj, rep = rd.simulate(init, 1.5 * 4.5 / lam, threshold, dt0=dt)
    return traj, rep


@register(
    "wong",
    {
        "lambda": Param("float", None, "single amplitude (overrides lambda_list)", _positive, "lambda > 0"),
        "lambda_list": Param("float_list", [0.5, 1.0, 2.0], "amplitudes", _positive, "lambda > 0"),
        "omega": Param("float", 1.0, "rotation rate"),
        "n_nodes": Param("int", 129, "Chebyshev nodes of the reduced solver", lambda n: n >= 33, "n >= 33"),
        "dt": Param("float", 1e-3, "maximal time step", _positive, "> 0"),
        "threshold": Param("float", 1e6, "reduced blowup threshold on sup|W_z|", _positive, "> 0"),
        "run_2d": Param("bool", True, "also run the 2D solver"),
        "nx": Param("int", 64, "2D Fourier points", lambda n: n >= 4 and n % 2 == 0, "even, >= 4"),
        "nz": Param("int", 129, "2D Chebyshev nodes", lambda n: n >= 9, "n >= 9"),
        "threshold_2d": Param("float", 1e3, "2D blowup threshold on sup|u_x|", _positive, "> 0"),
        "tail_tol": Param("float", 1e-3, "2D spectral-tail tolerance for resolution loss", _positive, "> 0"),
    },
    {
        "t_detect": "reduced-solver detection time (single lambda)",
        "bound": "guaranteed blowup time 9/(2 lambda)",
        "lower_bound_violation": "max relative violation of W_z(t,1) >= 3a/(3 - a t)",
        "t_detect_2d": "2D detection time (single lambda)",
    },
    criterion=3,
)
def _exp_wong(p, out: Path, rng):
    lams = [p["lambda"]] if p["lambda"] is not None else p["lambda_list"]
    metrics, checks = {}, {}
    worst_viol = 0.0
    rows = []
    for lam in lams:
        bound = rd.wong_bound(lam * (1.0 / 3.0 - cheb_grid(p["n_nodes"]).z ** 2))
        traj, rep = _wong_reduced(lam, p["omega"], p["n_nodes"], p["dt"], p["threshold"])
        wc = rd.wong_lower_bound_check(traj)
        worst_viol = max(worst_viol, wc.max_violation)
        metrics[_tag("t_detect", "lambda", lam)] = rep.t_detect
        metrics[_tag("t_extrapolated", "lambda", lam)] = rep.t_extrapolated
        metrics[_tag("bound", "lambda", lam)] = bound
        checks[f"reduced t_detect <= 1.1*bound (lambda={lam:g})"] = rep.t_detect <= 1.1 * bound
        row = [lam, bound, rep.t_detect, rep.t_extrapolated]
        if p["run_2d"]:
            init = h2d.wong_field(lam, p["omega"], p["nx"], p["nz"])
            tr2, rep2 = h2d.simulate2d(init, 1.5 * 4.5 / lam, p["threshold_2d"], dt0=p["dt"], tail_tol=p["tail_tol"])
            metrics[_tag("t_detect_2d", "lambda", lam)] = rep2.t_detect
            metrics[_tag("reason_2d", "lambda", lam)] = rep2.reason
            checks[f"2D t_detect <= 1.1*bound (lambda={lam:g})"] = rep2.t_detect <= 1.1 * bound
            tr2.summary_jsonl(out / f"pde2d_lambda{lam:g}.jsonl")
            row += [rep2.t_detect, rep2.reason]
        rows.append(row)
        if len(lams) == 1:
            metrics["t_detect"] = rep.t_detect
            metrics["bound"] = bound
            if p["run_2d"]:
                metrics["t_detect_2d"] = rep2.t_detect
    metrics["lower_bound_violation"] = worst_viol
    checks["lower bound holds to 1e-4"] = worst_viol <= 1e-4
    path = out / "wong.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["lambda", "bound", "t_detect", "t_extrapolated"] + (["t_detect_2d", "reason_2d"] if p["run_2d"] else []))
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return metrics, checks, [str(path)], {}


def _ratio_devs(times: dict, om: float):
    """Deviations of T(1)/T(|Om|) and T(1/|Om|)/T(1) from |Om|."""
    a = abs(om)
    return (abs(times[1.0] / times[a] / a - 1.0), abs(times[1.0 / a] / times[1.0] / a - 1.0))


@register(
    "rotation-scaling",
    {
        "omega_list": Param("float_list", [4.0, 16.0], "rotation rates |Omega| > 1", lambda x: abs(x) > 1, "|Omega| > 1"),
        "n_nodes": Param("int", 129, "Chebyshev nodes of the reduced solver", lambda n: n >= 33, "n >= 33"),
        "dt": Param("float", 1e-3, "maximal time step", _positive, "> 0"),
        "threshold": Param("float", 1e6, "reduced blowup threshold", _positive, "> 0"),
        "run_2d": Param("bool", True, "also report 2D detection times"),
        "nx": Param("int", 64, "2D Fourier points", lambda n: n >= 4 and n % 2 == 0, "even, >= 4"),
        "nz": Param("int", 129, "2D Chebyshev nodes", lambda n: n >= 9, "n >= 9"),
        "tail_tol": Param("float", 1e-3, "2D spectral-tail tolerance", _positive, "> 0"),
    },
    {
        "max_ratio_dev": "max deviation of reduced blowup-time ratios from the 1/lambda law",
        "max_ratio_dev_2d": "same for 2D detection times (reported, not checked)",
    },
    criterion=4,
)
def _exp_rotation(p, out: Path, rng):
    metrics, checks = {}, {}
    rows = []
    worst, worst2 = 0.0, 0.0
    for om in p["omega_list"]:
        a = abs(om)
        times, times2 = {}, {}
        for lam in (a, 1.0, 1.0 / a):
            _, rep = _wong_reduced(lam, om, p["n_nodes"], p["dt"], p["threshold"])
            times[lam] = rep.t_detect
            metrics[f"T[omega={om:g},lambda={lam:.6g}]"] = rep.t_detect
            row = [om, lam, rep.t_detect, 4.5 / lam]
            if p["run_2d"]:
                _, rep2 = h2d.simulate2d(h2d.wong_field(lam, om, p["nx"], p["nz"]), 1.5 * 4.5 / lam,
                                         1e3, dt0=p["dt"], tail_tol=p["tail_tol"])
                times2[lam] = rep2.t_detect
                metrics[f"T2d[omega={om:g},lambda={lam:.6g}]"] = rep2.t_detect
                row.append(rep2.t_detect)
            rows.append(row)
        devs = _ratio_devs(times, om)
        worst = max(worst, *devs)
        metrics[_tag("ratio_dev", "omega", om)] = max(devs)
        if p["run_2d"]:
            devs2 = _ratio_devs(times2, om)
            worst2 = max(worst2, *devs2)
            metrics[_tag("ratio_dev_2d", "omega", om)] = max(devs2)
    metrics["max_ratio_dev"] = worst
    if p["run_2d"]:
        metrics["max_ratio_dev_2d"] = worst2
    checks["reduced blowup-time ratios within 15% of 1/lambda"] = worst <= 0.15
    path = out / "rotation_scaling.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "lambda", "T_reduced", "bound"] + (["T_2d"] if p["run_2d"] else []))
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return metrics, checks, [str(path)], {}


TANH_BOX = (-0.5, 0.5, 0.05, 2.0)


@register(
    "dispersion",
    {
        "d": Param("float", None, "single tanh width (overrides d_list)", _positive, "d > 0"),
        "d_list": Param("float_list", [0.2, 0.1, 0.05, 0.025], "tanh widths", _positive, "d > 0"),
        "a": Param("float", 1.0, "two-layer lower value"),
        "b": Param("float", -1.0, "two-layer upper value"),
    },
    {
        "two_layer_err": "max |c_numeric - c_closed_form| for the two-layer roots",
        "beta": "Im c of the tanh root (single d)",
        "residual_d0.05": "|F(c)| at the tanh d=0.05 root",
        "re_c_d0.05": "|Re c| at the tanh d=0.05 root",
        "beta_monotone": "beta increases as d decreases and stays below 1",
    },
    criterion=5,
)
def _exp_dispersion(p, out: Path, rng):
    metrics, checks = {}, {}
    a, b = p["a"], p["b"]
    if a == b:
        raise ConfigError("parameters 'a' and 'b' must differ")
    up, down = ls.two_layer_root_closed_form(a, b)
    lo, hi = min(a, b), max(a, b)
    half = abs(a - b)
    prof2 = ls.ShearProfile.two_layer(a, b)
    found_up = ls.find_roots(prof2, (lo - half, hi + half, 0.1 * half, 2.0 * half))
    found_dn = ls.find_roots(prof2, (lo - half, hi + half, -2.0 * half, -0.1 * half))
    targets = sorted([up, down], key=lambda c: c.imag)
    found = found_dn + found_up
    if len(found) != 2:
        metrics["two_layer_err"] = math.inf
    else:
        metrics["two_layer_err"] = max(abs(r.c - c) for r, c in zip(sorted(found, key=lambda r: r.c.imag), targets))
    checks["two-layer roots within 1e-8"] = metrics["two_layer_err"] <= 1e-8
    ds = [p["d"]] if p["d"] is not None else p["d_list"]
    rows = []
    betas = []
    for d in ds:
        prof = ls.ShearProfile.tanh(d)
        roots = ls.find_roots(prof, TANH_BOX)
        if not roots:
            betas.append(math.nan)
            metrics[_tag("beta", "d", d)] = math.nan
            continue
        r = max(roots, key=lambda r: r.c.imag)
        betas.append(r.beta)
        metrics[_tag("beta", "d", d)] = r.beta
        metrics[_tag("residual", "d", d)] = r.residual
        metrics[_tag("re_c", "d", d)] = abs(r.c.real)
        rows.append((prof, r))
        if abs(d - 0.05) < 1e-12:
            metrics["residual_d0.05"] = r.residual
            metrics["re_c_d0.05"] = abs(r.c.real)
            checks["tanh d=0.05 root purely imaginary, residual <= 1e-10"] = (
                r.residual <= 1e-10 and abs(r.c.real) <= 1e-8 and r.purely_imaginary
            )
    if len(ds) == 1:
        metrics["beta"] = betas[0]
    order = np.argsort(ds)[::-1]  # decreasing d
    seq = [betas[i] for i in order]
    mono = bool(all(np.isfinite(seq)) and all(x < y for x, y in zip(seq[:-1], seq[1:])) and seq[-1] < 1.0)
    if len(ds) > 1:
        metrics["beta_monotone"] = mono
        checks["beta increases toward 1 as d decreases"] = mono
    path = ls.write_root_table(out / "roots.csv", rows)
    return metrics, checks, [str(path)], {}


@register(
    "eigenfunction",
    {
        "d_list": Param("float_list", [0.2, 0.1, 0.05, 0.025], "tanh widths", _positive, "d > 0"),
        "n_nodes": Param("int", None, "nodes per panel (default: smallest resolving size)", lambda n: n >= 9, "n >= 9"),
    },
    {
        "chi_top": "max over d of |chi(1)| / max|chi|",
        "ode_residual": "max over d of max|(U-c) chi'' - U'' chi| / max|chi''|",
    },
    criterion=6,
)
def _exp_eigenfunction(p, out: Path, rng):
    metrics = {"chi_top": 0.0, "ode_residual": 0.0, "chi_seconds": 0.0}
    for d in p["d_list"]:
        prof = ls.ShearProfile.tanh(d)
        roots = ls.find_roots(prof, TANH_BOX)
        r = max(roots, key=lambda r: r.c.imag)
        start = time.perf_counter()
        ef = ls.eigenfunction_chi(prof, r.c, n_nodes=p["n_nodes"])
        metrics["chi_seconds"] += time.perf_counter() - start
        top = float(abs(ef.chi[-1]) / np.max(np.abs(ef.chi)))
        _, chi2 = ef.derivatives()
        res = float(np.max(np.abs(ef.ode_residual(prof))) / np.max(np.abs(chi2)))
        metrics[_tag("chi_top", "d", d)] = top
        metrics[_tag("ode_residual", "d", d)] = res
        metrics["chi_top"] = max(metrics["chi_top"], top)
        metrics["ode_residual"] = max(metrics["ode_residual"], res)
        path = out / f"chi_d{d:g}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "re_chi", "im_chi"])
            for zj, cj in zip(ef.grid, ef.chi):
                w.writerow([fmt(zj), fmt(cj.real), fmt(cj.imag)])
    checks = {
        "|chi(1)| <= 1e-8 max|chi|": metrics["chi_top"] <= 1e-8,
        "ODE residual <= 1e-8 max|chi''|": metrics["ode_residual"] <= 1e-8,
    }
    return metrics, checks, [], {}


def _beta_root(d: float) -> float:
    roots = ls.find_roots(ls.ShearProfile.tanh(d), TANH_BOX)
    if not roots:
        raise DomainError(f"no unstable root for tanh d={d}")
    return max(r.beta for r in roots)


@register(
    "hadamard",
    {
        "d": Param("float", 0.05, "tanh width", _positive, "d > 0"),
        "n": Param("int", None, "single Fourier index (overrides n_list)", _positive, "n >= 1"),
        "n_list": Param("int_list", [1, 2, 4, 8], "Fourier indices", _positive, "n >= 1"),
        "n_nodes": Param("int", 257, "Chebyshev nodes", lambda n: n >= 33, "n >= 33"),
        "efolds": Param("float", 12.0, "run length in e-folds of the expected growth", _positive, "> 0"),
    },
    {
        "linearity_dev": "max |sigma_n / (2 pi n beta_fit) - 1|",
        "beta_fit_err": "|beta_fit / beta_root - 1|",
        "eigen_seed_err": "relative error of the growth rate from chi-seeded data (n=2, from t=0)",
        "sigma": "growth rate (single n)",
    },
    criterion=7,
)
def _exp_hadamard(p, out: Path, rng):
    prof = ls.ShearProfile.tanh(p["d"])
    beta = _beta_root(p["d"])
    ns = [p["n"]] if p["n"] is not None else p["n_list"]
    psi0 = ls.default_psi0(p["n_nodes"], int(rng.integers(2 ** 31)))
    sig = []
    metrics = {}
    for n in ns:
        t_end = p["efolds"] / (2.0 * np.pi * n * beta)
        est = ls.linearized_evolution(prof, n, psi0, t_end, n_nodes=p["n_nodes"])
        sig.append((n, est.sigma))
        metrics[_tag("sigma", "n", n)] = est.sigma
    metrics["beta_root"] = beta
    checks = {}
    if len(ns) == 1:
        metrics["sigma"] = sig[0][1]
    else:
        beta_fit, dev = ls.growth_linearity_check(sig)
        metrics["beta_fit"] = beta_fit
        metrics["linearity_dev"] = dev
        metrics["beta_fit_err"] = abs(beta_fit / beta - 1.0)
        checks["growth linear in n within 5%"] = dev <= 0.05
        checks["beta_fit within 5% of root"] = metrics["beta_fit_err"] <= 0.05
    # eigenfunction-seeded run: exponential from t = 0
    r = max(ls.find_roots(prof, TANH_BOX), key=lambda r: r.c.imag)
    chi = ls.eigenfunction_on_grid(prof, r.c, p["n_nodes"])
    est = ls.linearized_evolution(prof, 2, chi, 3.0 / (4.0 * np.pi * beta), n_nodes=p["n_nodes"])
    slope = float(np.polyfit(est.times, est.log_norm, 1)[0])
    metrics["eigen_seed_err"] = abs(slope / (4.0 * np.pi * beta) - 1.0)
    checks["chi-seeded growth within 2% from t=0"] = metrics["eigen_seed_err"] <= 0.02
    path = ls.write_growth_table(out / "growth.csv", sig, metrics.get("beta_fit", beta))
    series = {}
    if len(ns) > 1:
        series["sigma_vs_n"] = Series(
            [n for n, _ in sig], [s for _, s in sig], "n", "sigma_n", style="o",
            overlay=([0, max(ns)], [0.0, 2 * np.pi * metrics["beta_fit"] * max(ns)], "2 pi beta_fit n"),
        )
    return metrics, checks, [str(path)], series


@register(
    "gevrey",
    {
        "d": Param("float", 0.05, "tanh width", _positive, "d > 0"),
        "t_amp": Param("float", 0.1, "time for the amplification factors", _positive, "> 0"),
        "n_amp": Param("int_list", [8, 16, 32], "Fourier indices for A(n, t)", _positive, "n >= 1"),
        "delta0": Param("float", 0.5, "initial analyticity width", _positive, "> 0"),
        "t_evolve": Param("float", 0.05, "evolution time of the analytic data", _positive, "> 0"),
        "nx": Param("int", 192, "Fourier points", lambda n: n >= 48 and n % 2 == 0, "even, >= 48"),
        "nz": Param("int", 65, "Chebyshev nodes", lambda n: n >= 17, "n >= 17"),
    },
    {
        "amp_slope_err": "|slope of log A(n) in n / (2 pi beta t) - 1|",
        "amp_linearity": "max relative residual of the affine fit of log A(n)",
        "planted_err": "max relative error of (delta, s) on the planted spectra",
        "s_final": "fitted s of the evolved analytic data",
        "delta_rate_err": "|d delta/dt / (2 pi beta) - 1|",
    },
    criterion=8,
)
def _exp_gevrey(p, out: Path, rng):
    prof = ls.ShearProfile.tanh(p["d"])
    beta = _beta_root(p["d"])
    metrics, checks = {}, {}
    psi0 = ls.default_psi0(257, int(rng.integers(2 ** 31)))
    ns = np.array(p["n_amp"], dtype=float)
    log_a = np.array([math.log(h2d.sobolev_amplification(prof, int(n), p["t_amp"], psi0)) for n in ns])
    for n, la in zip(ns, log_a):
        metrics[_tag("log_A", "n", int(n))] = la
    slope, icpt = np.polyfit(ns, log_a, 1)
    metrics["amp_slope"] = float(slope)
    metrics["amp_slope_err"] = abs(slope / (2.0 * np.pi * beta * p["t_amp"]) - 1.0)
    metrics["amp_linearity"] = float(np.max(np.abs(slope * ns + icpt - log_a) / np.abs(log_a)))
    checks["log A linear in n within 10%"] = metrics["amp_slope_err"] <= 0.1 and metrics["amp_linearity"] <= 0.1

    g = h2d.Grid2D(256, 9)
    x, z = g.mesh()
    planted_err = 0.0
    for (dl, s_true) in ((0.3, 1.0), (0.5, 2.0)):
        f = np.zeros((g.nx, g.nz))
        for k in range(1, g.nx // 2):
            f += math.exp(-dl * k ** (1.0 / s_true)) * np.sin(2 * np.pi * k * x) * (1.0 + z)
        fit = h2d.spectral_decay_fit(f)
        err = max(abs(fit.delta / dl - 1.0), abs(fit.s / s_true - 1.0))
        metrics[f"planted_delta[{dl:g},{s_true:g}]"] = fit.delta
        metrics[f"planted_s[{dl:g},{s_true:g}]"] = fit.s
        planted_err = max(planted_err, err)
    metrics["planted_err"] = planted_err
    checks["planted spectra recovered within 5%"] = planted_err <= 0.05

    gp = h2d.gevrey_persistence(prof, p["delta0"], p["t_evolve"], p["nx"], p["nz"])
    metrics["s_initial"] = gp.fit_initial.s
    metrics["s_final"] = gp.fit_final.s
    metrics["delta_rate"] = gp.delta_rate
    metrics["delta_rate_err"] = abs(gp.delta_rate / (2.0 * np.pi * beta) - 1.0)
    checks["evolved s in [0.8, 1.2]"] = 0.8 <= gp.fit_final.s <= 1.2
    checks["delta decays at 2 pi beta within 20%"] = metrics["delta_rate_err"] <= 0.2
    series = {"log_amplification": Series(list(ns), list(log_a), "n", "log A(n, t)", style="o",
                                          overlay=(list(ns), list(slope * ns + icpt), "affine fit"))}
    return metrics, checks, [], series


@register(
    "pde2d-blowup",
    {
        "alpha": Param("float", 1.0 / 3.0, "profile Hoelder exponent", _unit_open, "0 < alpha < 1"),
        "omega": Param("float", 10.0, "rotation rate"),
        "nx": Param("int", 128, "Fourier points", lambda n: n >= 4 and n % 2 == 0, "even, >= 4"),
        "nz": Param("int", 129, "Chebyshev nodes", lambda n: n >= 33, "n >= 33"),
        "dt": Param("float", 5e-4, "maximal time step", _positive, "> 0"),
        "t_end": Param("float", 1.2, "final time", _positive, "> 0"),
        "threshold": Param("float", 1e3, "threshold on sup|u_x|", _positive, "> 0"),
        "tail_tol": Param("float", 1e-3, "spectral-tail tolerance", _positive, "> 0"),
    },
    {
        "t_detect": "2D detection time for the self-similar-compatible data",
        "t_extrapolated": "singularity time from the 1/sup|u_x| fit",
        "energy_drift": "max_{t<=0.2} |E(t)/E(0) - 1|",
        "parity_drift": "max parity defect",
        "compat_drift": "max compatibility defect",
    },
)
def _exp_pde2d(p, out: Path, rng):
    prof = build_profile(p["alpha"], p["nz"], verify=False)
    init = h2d.self_similar_field(prof, p["omega"], p["nx"])
    traj, rep = h2d.simulate2d(init, p["t_end"], p["threshold"], dt0=p["dt"], tail_tol=p["tail_tol"])
    early = traj.times <= 0.2 + 1e-12
    metrics = {
        "t_detect": rep.t_detect,
        "t_extrapolated": rep.t_extrapolated,
        "reason": rep.reason,
        "energy_drift": float(np.max(np.abs(traj.energy[early] / traj.energy[0] - 1.0))),
        "parity_drift": float(np.max(traj.parity_drift)),
        "compat_drift": float(np.max(traj.compat_drift)),
        "final_sup_ux": float(traj.sup_ux[-1]),
        "final_sup_uz": float(traj.sup_uz[-1]),
    }
    checks = {
        "detected before 1.1": rep.blew_up and rep.t_detect <= 1.1,
        "energy conserved to 1e-6 for t <= 0.2": metrics["energy_drift"] <= 1e-6,
    }
    traj.summary_jsonl(out / "pde2d.jsonl")
    (out / "blowup.json").write_text(rep.to_json() + "\n")
    h2d.write_snapshot(traj.states[-1], out / "final.bin")
    series = {"sup_ux": Series(list(traj.times), list(traj.sup_ux), "t", "sup|u_x|", logy=True)}
    return metrics, checks, [str(out / "pde2d.jsonl"), str(out / "final.bin")], series


@register(
    "cross-consistency",
    {
        "alpha": Param("float", 1.0 / 3.0, "profile Hoelder exponent", _unit_open, "0 < alpha < 1"),
        "omega": Param("float", 10.0, "rotation rate"),
        "nx": Param("int", 256, "Fourier points", lambda n: n >= 4 and n % 2 == 0, "even, >= 4"),
        "nz": Param("int", 129, "Chebyshev nodes", lambda n: n >= 33, "n >= 33"),
        "dt_2d": Param("float", 5e-4, "maximal 2D time step", _positive, "> 0"),
        "dt_reduced": Param("float", 1e-4, "maximal reduced time step", _positive, "> 0"),
        "t_end": Param("float", 0.5, "comparison horizon", _positive, "> 0"),
    },
    {
        "line_error": "max over snapshots of sup_z |W_2d - W| and |V_2d - V|",
        "parity_drift": "max parity defect of the 2D run",
        "compat_drift": "max compatibility defect of the 2D run",
        "energy_drift": "max_{t<=0.2} |E(t)/E(0) - 1|",
    },
    criterion=9,
)
def _exp_cross(p, out: Path, rng):
    prof = build_profile(p["alpha"], p["nz"], verify=False)
    save = np.round(np.linspace(0.0, p["t_end"], 11)[1:], 12)
    tr2, _ = h2d.simulate2d(h2d.self_similar_field(prof, p["omega"], p["nx"]), p["t_end"], 1e6,
                            dt0=p["dt_2d"], save_times=save, tail_tol=None)
    tr1, _ = rd.simulate(rd.self_similar_state(prof, p["omega"]), p["t_end"], 1e6,
                         dt0=p["dt_reduced"], save_times=save)
    by_time = {round(s.time, 9): s for s in tr1.states}
    err_w = err_v = 0.0
    rows = []
    for s in tr2.states[1:]:
        line = h2d.restrict_line(s)
        ref = by_time[round(s.time, 9)]
        ew = float(np.max(np.abs(line.w_field - ref.w_field)))
        ev = float(np.max(np.abs(line.v_field - ref.v_field)))
        err_w, err_v = max(err_w, ew), max(err_v, ev)
        rows.append((s.time, ew, ev))
    early = tr2.times <= 0.2 + 1e-12
    metrics = {
        "line_error_w": err_w,
        "line_error_v": err_v,
        "line_error": max(err_w, err_v),
        "parity_drift": float(np.max(tr2.parity_drift)),
        "compat_drift": float(np.max(tr2.compat_drift)),
        "energy_drift": float(np.max(np.abs(tr2.energy[early] / tr2.energy[0] - 1.0))),
    }
    checks = {
        "restricted 2D matches reduced within 1e-3": metrics["line_error"] <= 1e-3,
        "parity drift <= 1e-8": metrics["parity_drift"] <= 1e-8,
        "compatibility drift <= 1e-8": metrics["compat_drift"] <= 1e-8,
    }
    path = out / "line_error.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "err_w", "err_v"])
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return metrics, checks, [str(path)], {}


@register(
    "uniqueness",
    {
        "alpha": Param("float", 1.0 / 3.0, "profile Hoelder exponent", _unit_open, "0 < alpha < 1"),
        "omega": Param("float", 10.0, "rotation rate"),
        "n_nodes": Param("int", 129, "Chebyshev nodes", lambda n: n >= 33, "n >= 33"),
        "epsilon": Param("float", 1e-8, "perturbation size", _positive, "> 0"),
        "t_end": Param("float", 0.5, "horizon", _positive, "> 0"),
        "dt": Param("float", 1e-3, "maximal time step", _positive, "> 0"),
    },
    {
        "identical_separation": "sup_t D(t) for identical data",
        "fitted_constant": "Groenwall constant fitted on the training pair",
        "validation_ratio": "sup_t D(t)/B(t) on the validation pair with the fitted constant",
    },
    criterion=10,
)
def _exp_uniqueness(p, out: Path, rng):
    prof = build_profile(p["alpha"], p["n_nodes"], verify=False)
    z = cheb_grid(p["n_nodes"]).z
    om, eps = p["omega"], p["epsilon"]
    save = np.round(np.linspace(0.0, p["t_end"], 51)[1:], 12)

    def run(dw, dv):
        init = rd.make_state(prof.phi + eps * dw, om + eps * dv, om)
        return rd.simulate(init, p["t_end"], 1e6, dt0=p["dt"], save_times=save)[0]

    zero = np.zeros_like(z)
    base = run(zero, zero)
    twin = run(zero, zero)
    c1 = rng.standard_normal(3)
    c2 = rng.standard_normal(3)
    train = run(sum(c * np.sin((j + 1) * np.pi * z) for j, c in enumerate(c1)), np.cos(np.pi * z))
    valid = run(z * (1.0 - z) * (z - 0.3) * c2[0], z ** 2 * c2[1])
    same = rd.uniqueness_diagnostic(base, twin)
    fit = rd.uniqueness_diagnostic(base, train)
    const = fit.fitted_constant()
    val = rd.uniqueness_diagnostic(base, valid)
    metrics = {
        "identical_separation": float(np.max(same.separation)),
        "fitted_constant": const,
        "validation_ratio": val.sup_ratio(const),
    }
    checks = {
        "identical data give D <= 1e-20": metrics["identical_separation"] <= 1e-20,
        "validation pair inside the fitted envelope": metrics["validation_ratio"] <= 1.0 + 1e-12,
    }
    path = out / "uniqueness.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "D_validation", "B_validation"])
        for t, d, b in zip(val.times, val.separation, val.envelope(const)):
            w.writerow([fmt(t), fmt(d), fmt(b)])
    return metrics, checks, [str(path)], {}


# --- running ------------------------------------------------------------------------------


def _write_metrics(result: ExperimentResult, out: Path) -> Path:
    path = out / "metrics.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric", "value"])
        for k in sorted(result.metrics):
            w.writerow([k, fmt(result.metrics[k])])
        for k in sorted(result.checks):
            w.writerow([f"check:{k}", fmt(result.checks[k])])
    return path


def run(config: ExperimentConfig, output_dir: Path | None = None) -> ExperimentResult:
    """Run one experiment and write its artifacts; failures are recorded, not raised."""
    exp = REGISTRY.get(config.experiment)
    if exp is None:
        raise ConfigError(f"experiment: unknown name {config.experiment!r}")
    params = validate_parameters(config.experiment, config.parameters)
    out = Path(output_dir) if output_dir is not None else config.resolved_output()
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output_dir: cannot create {out}: {exc}") from exc
    rng = np.random.default_rng(config.seed)
    start = time.perf_counter()
    try:
        metrics, checks, arts, series = exp.func(dict(params), out, rng)
        error = ""
    except HydrolabError as exc:
        if isinstance(exc, ConfigError):
            raise
        metrics, checks, arts, series = {}, {"completed": False}, [], {}
        error = f"{type(exc).__name__} in {config.experiment}: {exc}"
    wall = time.perf_counter() - start
    result = ExperimentResult(config, metrics, checks, arts, wall, series, error)
    missing = [m for m in exp.manifest if m not in metrics and not _optional(m, params)]
    if missing and not error:
        result.error = f"manifest metrics missing: {missing}"
    (out / "config.toml").write_text(config.to_toml())
    result.artifacts = [str(_write_metrics(result, out))] + list(arts)
    (out / "result.json").write_text(result.to_json() + "\n")
    return result


def _optional(metric: str, params: dict) -> bool:
    """Metrics defined only for single-value or list-valued runs."""
    single = {"t_detect", "bound", "t_detect_2d", "beta", "sigma"}
    listed = {"linearity_dev", "beta_fit_err", "beta_monotone"}
    if metric in single:
        return True
    if metric in listed:
        return True
    if metric.endswith("d0.05"):
        return True
    if metric == "max_ratio_dev_2d" and not params.get("run_2d", True):
        return True
    return False


def _run_row(args):
    config, out = args
    try:
        return run(config, out)
    except HydrolabError as exc:
        return ExperimentResult(config, {}, {"completed": False}, [], 0.0, {}, f"{type(exc).__name__}: {exc}")


@dataclass
class SweepResult:
    axis: str
    values: list
    rows: list
    checks: dict
    table: Path

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows) and all(self.checks.values())


SWEEP_ALIASES = {"lambda": "lambda", "d": "d", "n": "n"}


def sweep(base: ExperimentConfig, axis: str, values, jobs: int = 1, output_dir: Path | None = None) -> SweepResult:
    """Independent runs over one parameter; rows go to their own subdirectories."""
    spec = REGISTRY[base.experiment].params
    if axis not in spec:
        raise ConfigError(f"axis: {axis!r} is not a parameter of {base.experiment}; allowed {sorted(spec)}")
    root = Path(output_dir) if output_dir is not None else base.resolved_output()
    configs = []
    for v in values:
        cfg = apply_overrides(base, [(axis, v)])
        configs.append((cfg, root / f"{axis}={fmt(cfg.parameters[axis])}"))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_run_row, configs))
    else:
        rows = [_run_row(c) for c in configs]
    checks = _sweep_checks(base.experiment, axis, rows)
    table = _write_sweep_table(root, axis, rows)
    return SweepResult(axis, list(values), rows, checks, table)


def _sweep_checks(name: str, axis: str, rows) -> dict:
    ok = [r for r in rows if not r.error]
    vals = [r.config.parameters[axis] for r in ok]
    if name == "wong" and axis == "lambda" and len(ok) >= 2:
        t = [r.metrics["t_detect"] for r in ok]
        ref = t[0] * vals[0]
        dev = max(abs(ti * li / ref - 1.0) for ti, li in zip(t, vals))
        return {"blowup times scale as 1/lambda within 15%": dev <= 0.15}
    if name == "dispersion" and axis == "d" and len(ok) >= 2:
        pairs = sorted(zip(vals, [r.metrics["beta"] for r in ok]), reverse=True)
        b = [q for _, q in pairs]
        return {"beta increases toward 1 as d decreases": all(x < y for x, y in zip(b[:-1], b[1:])) and b[-1] < 1}
    if name == "hadamard" and axis == "n" and len(ok) >= 3:
        _, dev = ls.growth_linearity_check([(r.config.parameters["n"], r.metrics["sigma"]) for r in ok])
        return {"growth linear in n within 5%": dev <= 0.05}
    return {}


def _write_sweep_table(root: Path, axis: str, rows) -> Path:
    root.mkdir(parents=True, exist_ok=True)
    keys = sorted({k for r in rows for k in r.metrics})
    path = root / "sweep.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([axis, "status", "error"] + keys)
        for r in rows:
            status = "pass" if r.passed else "fail"
            w.writerow([fmt(r.config.parameters[axis]), status, r.error] + [fmt(r.metrics.get(k, "")) for k in keys])
    return path


# --- reports ------------------------------------------------------------------------------


def _svg(series: Series, path: Path, title: str) -> Path:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed salt and metadata keep repeated reports byte-identical
    matplotlib.rcParams["svg.hashsalt"] = "hydrolab"
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.plot(series.x, series.y, series.style, label=series.ylabel)
    if series.overlay is not None:
        ox, oy, label = series.overlay
        ax.plot(ox, oy, "--", label=label)
    if series.logy:
        ax.set_yscale("log")
    ax.set_xlabel(series.xlabel)
    ax.set_ylabel(series.ylabel)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def emit_report(results, output_dir) -> list[Path]:
    """CSV summary, one SVG per recorded series and a Markdown summary."""
    results = list(results)
    if not results:
        raise DomainError("emit_report needs at least one result")
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create report directory {out}: {exc}") from exc
    files = []
    table = out / "summary.csv"
    with table.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["experiment", "metric", "value"])
        for r in results:
            for k in sorted(r.metrics):
                w.writerow([r.config.experiment, k, fmt(r.metrics[k])])
    files.append(table)
    for i, r in enumerate(results):
        for name, s in r.series.items():
            files.append(_svg(s, out / f"{i:02d}_{r.config.experiment}_{name}.svg", f"{r.config.experiment}: {name}"))
    lines = ["# Experiment summary", ""]
    for r in results:
        exp = REGISTRY[r.config.experiment]
        verdict = "PASS" if r.passed else "FAIL"
        lines += [f"## {r.config.experiment}: {verdict}", ""]
        if r.error:
            lines += [f"Error: {r.error}", ""]
        lines += ["| metric | value | meaning |", "|---|---|---|"]
        for m, desc in exp.manifest.items():
            if m in r.metrics:
                lines.append(f"| {m} | {fmt(r.metrics[m])} | {desc.replace('|', chr(92) + '|')} |")
        lines += ["", "| check | result |", "|---|---|"]
        for c, ok in r.checks.items():
            lines.append(f"| {c.replace('|', chr(92) + '|')} | {'pass' if ok else 'fail'} |")
        lines += ["", f"Wall clock: {r.wall_clock:.1f} s", ""]
    md = out / "summary.md"
    md.write_text("\n".join(lines))
    files.append(md)
    return files


def default_config(name: str, output_dir: str = "") -> ExperimentConfig:
    if name not in REGISTRY:
        raise ConfigError(f"unknown experiment {name!r}")
    return ExperimentConfig(name, validate_parameters(name, {}), output_dir, 0)
