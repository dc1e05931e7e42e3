"""Reduced system on the symmetry line x = 0.

With W(t, z) = w(t, 0, z) and V(t, z) = -v_x(t, 0, z) the odd-in-x dynamics
restrict to

    W_tz - W_z^2 + W W_zz + 2 int W_z^2 - Omega V + Omega int V = 0,
    V_t - W_z V + W V_z + Omega W_z = 0,

with W(t, 0) = W(t, 1) = 0.  Space is discretized by Chebyshev collocation,
time by classical RK4.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cheb import ChebGrid, cheb_grid
from .errors import BlowupSignal, DomainError, HypothesisError, StabilityError

RK4_LIMIT = 2.8  # RK4 stability interval on the imaginary axis is 2 sqrt(2)


@dataclass(frozen=True)
class ReducedState:
    time: float
    grid: np.ndarray
    w_field: np.ndarray
    v_field: np.ndarray
    omega: float

    @property
    def n_nodes(self) -> int:
        return len(self.grid)

    @property
    def cheb(self) -> ChebGrid:
        return cheb_grid(len(self.grid))

    def w_z(self) -> np.ndarray:
        return self.cheb.diff @ self.w_field

    def sup_wz(self) -> float:
        return float(np.max(np.abs(self.w_z())))

    def sup_v(self) -> float:
        return float(np.max(np.abs(self.v_field)))


def make_state(w, v, omega: float, time: float = 0.0) -> ReducedState:
    w = np.array(w, dtype=float)
    v = np.array(v, dtype=float)
    if w.shape != v.shape or w.ndim != 1:
        raise DomainError("W and V must be 1-D arrays of equal length")
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise BlowupSignal("non-finite entries in reduced state")
    if max(abs(w[0]), abs(w[-1])) > 1e-12:
        raise DomainError("W must vanish at z = 0 and z = 1")
    w[0] = w[-1] = 0.0
    z = cheb_grid(len(w)).z
    return ReducedState(float(time), z, w, v, float(omega))


def self_similar_state(profile, omega: float) -> ReducedState:
    """Initial data W = phi, V = Omega."""
    return make_state(profile.phi, np.full(len(profile.phi), omega), omega)


def wong_state(lam: float, omega: float, n_nodes: int = 129) -> ReducedState:
    """Line data of u0 = lam (1/3 - z^2) sin(x)-type initial velocity.

    d_x u0(0, z) = lam (1/3 - z^2), so W0 = lam (z^3 - z) / 3 and
    W0_z(1) = 2 lam / 3.
    """
    z = cheb_grid(n_nodes).z
    return make_state(lam * (z ** 3 - z) / 3.0, np.full(n_nodes, omega), omega)


def _w_tendency(grid: ChebGrid, w, v, omega):
    wz = grid.diff @ w
    wzz = grid.diff2 @ w
    # subtract a boundary value first so a constant V contributes exactly zero
    dv = v - v[0]
    wtz = wz * wz - w * wzz - 2.0 * grid.integrate(wz * wz) + omega * (dv - grid.integrate(dv))
    return wtz, wz


def reduced_rhs(state: ReducedState):
    """Time derivatives (W_t, V_t) of the reduced system.

    W_t is recovered from W_tz by the spectral antiderivative from z = 0, so
    W_t(0) = 0 exactly and W_t(1) is a discretization diagnostic.
    """
    grid = state.cheb
    w, v, omega = state.w_field, state.v_field, state.omega
    wtz, wz = _w_tendency(grid, w, v, omega)
    wt = grid.cumint @ wtz
    vz = grid.diff @ (v - v[0])
    vt = wz * v - w * vz - omega * wz
    if not (np.all(np.isfinite(wt)) and np.all(np.isfinite(vt))):
        raise BlowupSignal(f"non-finite tendency at t={state.time}")
    return wt, vt


def compatibility_defect(state: ReducedState) -> float:
    """|int_0^1 W_tz dz|, zero for the continuous problem."""
    grid = state.cheb
    wtz, _ = _w_tendency(grid, state.w_field, state.v_field, state.omega)
    return float(abs(grid.integrate(wtz)))


def rate_scale(state: ReducedState) -> float:
    """Largest frequency the explicit scheme must resolve."""
    h = state.cheb.spacing()
    advect = float(np.max(np.abs(state.w_field) / h))
    return advect + state.sup_wz() + abs(state.omega)


def stability_limit(state: ReducedState) -> float:
    scale = rate_scale(state)
    return math.inf if scale == 0.0 else RK4_LIMIT / scale


def step(state: ReducedState, dt: float) -> ReducedState:
    """One classical RK4 step; boundary values of W are re-pinned to zero."""
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    limit = stability_limit(state)
    if dt > limit:
        raise StabilityError(f"dt={dt:.3e} exceeds stability limit {limit:.3e}")

    def stage(w, v, t):
        return reduced_rhs(ReducedState(t, state.grid, w, v, state.omega))

    w0, v0, t0 = state.w_field, state.v_field, state.time
    k1w, k1v = stage(w0, v0, t0)
    k2w, k2v = stage(w0 + 0.5 * dt * k1w, v0 + 0.5 * dt * k1v, t0 + 0.5 * dt)
    k3w, k3v = stage(w0 + 0.5 * dt * k2w, v0 + 0.5 * dt * k2v, t0 + 0.5 * dt)
    k4w, k4v = stage(w0 + dt * k3w, v0 + dt * k3v, t0 + dt)
    w = w0 + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w)
    v = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise BlowupSignal(f"non-finite state after step from t={t0}")
    w[0] = w[-1] = 0.0
    return ReducedState(t0 + dt, state.grid, w, v, state.omega)


# --- simulation ---------------------------------------------------------------------


@dataclass
class BlowupReport:
    blew_up: bool
    t_detect: float
    t_extrapolated: float
    witness_norm: str
    history: list = field(default_factory=list)
    reason: str = ""

    def to_json(self) -> str:
        return json.dumps(
            {
                "blew_up": self.blew_up,
                "t_detect": self.t_detect,
                "t_extrapolated": self.t_extrapolated,
                "witness_norm": self.witness_norm,
                "reason": self.reason,
                "history": [list(map(float, h)) for h in self.history],
            }
        )


@dataclass
class Trajectory:
    """Snapshots of a reduced simulation plus per-step norm history."""

    states: list
    times: np.ndarray
    sup_wz: np.ndarray
    sup_v: np.ndarray
    wz_top: np.ndarray
    wt_top_drift: np.ndarray
    compat_defect: np.ndarray

    def snapshot_times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    def to_jsonl(self, path) -> Path:
        path = Path(path)
        with path.open("w") as fh:
            for s in self.states:
                fh.write(
                    json.dumps(
                        {
                            "t": s.time,
                            "sup_wz": s.sup_wz(),
                            "sup_v": s.sup_v(),
                            "w": s.w_field.tolist(),
                            "v": s.v_field.tolist(),
                        }
                    )
                    + "\n"
                )
        return path


def extrapolate_singularity(times, sup_norm, window: int = 30) -> float:
    """Zero of a least-squares line through 1/sup_norm over the last samples."""
    t = np.asarray(times[-window:], dtype=float)
    inv = 1.0 / np.asarray(sup_norm[-window:], dtype=float)
    if len(t) < 2:
        return math.nan
    slope, intercept = np.polyfit(t, inv, 1)
    if slope >= 0:
        return math.inf
    return float(-intercept / slope)


def simulate(
    init: ReducedState,
    t_end: float,
    threshold: float = 1e6,
    dt0: float = 1e-4,
    cfl: float = 0.5,
    save_every: int | float | None = None,
    save_times=None,
    fit_window: int = 30,
):
    """Integrate until ``t_end`` or until sup|W_z| exceeds ``threshold``.

    Time steps are dt = min(dt0, cfl / rate), where the rate combines
    sup|W_z|, the advective frequency max|W|/h and |Omega|.  Snapshots are
    kept every ``save_every`` steps and at any requested ``save_times``.
    Returns ``(trajectory, report)``.
    """
    start_norm = init.sup_wz()
    if not threshold > start_norm:
        raise DomainError(
            f"threshold {threshold} must exceed initial sup|W_z| = {start_norm}"
        )
    state = init
    pending = sorted(float(t) for t in (save_times if save_times is not None else []) if init.time < t <= t_end)
    states = [state]
    times, sups, supv, top, drift, compat = [], [], [], [], [], []

    def record(s):
        wt, _ = reduced_rhs(s)
        wz = s.w_z()
        times.append(s.time)
        sups.append(float(np.max(np.abs(wz))))
        supv.append(s.sup_v())
        top.append(float(wz[-1]))
        drift.append(float(abs(wt[-1])))
        compat.append(compatibility_defect(s))

    record(state)
    n_steps = 0
    blew_up = False
    reason = "reached t_end"
    while state.time < t_end - 1e-14:
        rate = rate_scale(state)
        dt = dt0 if rate == 0.0 else min(dt0, cfl / rate)
        if pending:
            dt = min(dt, pending[0] - state.time)
        dt = min(dt, t_end - state.time)
        if dt < 1e-12:
            blew_up = True
            reason = "time step underflow"
            break
        try:
            state = step(state, dt)
        except BlowupSignal:
            blew_up = True
            reason = "non-finite state"
            break
        n_steps += 1
        record(state)
        if pending and abs(state.time - pending[0]) < 1e-13:
            pending.pop(0)
            states.append(state)
        elif save_every and n_steps % int(save_every) == 0:
            states.append(state)
        if sups[-1] > threshold:
            blew_up = True
            reason = "threshold exceeded"
            break
    if states[-1] is not state:
        states.append(state)

    traj = Trajectory(
        states=states,
        times=np.array(times),
        sup_wz=np.array(sups),
        sup_v=np.array(supv),
        wz_top=np.array(top),
        wt_top_drift=np.array(drift),
        compat_defect=np.array(compat),
    )
    t_ext = extrapolate_singularity(traj.times, traj.sup_wz, fit_window) if blew_up else math.inf
    report = BlowupReport(
        blew_up=blew_up,
        t_detect=float(times[-1]) if blew_up else math.inf,
        t_extrapolated=t_ext,
        witness_norm="sup|W_z|",
        history=list(zip(times, sups, supv)),
        reason=reason,
    )
    return traj, report


# --- diagnostics -------------------------------------------------------------------------


def self_similar_error(trajectory: Trajectory, profile, t_max: float = 0.9) -> float:
    """max over snapshots with t <= t_max of sup_z |(1 - t) W(t) - phi|."""
    phi = np.asarray(profile.phi)
    worst = 0.0
    for s in trajectory.states:
        if len(s.w_field) != len(phi):
            raise DomainError("trajectory and profile grids differ")
        if s.time <= t_max + 1e-12:
            worst = max(worst, float(np.max(np.abs((1.0 - s.time) * s.w_field - phi))))
    return worst


def wong_bound(u0_x_slice) -> float:
    """Guaranteed blowup time -3 / d_x u0(0, 1) from the wall value of the slice.

    ``u0_x_slice`` is d_x u0(0, z) sampled on increasing z in [0, 1].
    """
    top = float(np.asarray(u0_x_slice)[-1])
    if not top < 0:
        raise HypothesisError({"d_x u0(0,1) < 0": f"got {top!r}"})
    return -3.0 / top


def wong_hypotheses(state: ReducedState, tol: float = 1e-8) -> dict:
    """Failed conditions among W_zz(0) = 0, W_zzz > 0 on [0, 1], V constant."""
    g = state.cheb
    wzz = g.diff2 @ state.w_field
    wzzz = g.diff @ wzz
    scale = max(1.0, float(np.max(np.abs(wzz))))
    failed = {}
    if abs(wzz[0]) > tol * scale:
        failed["W_zz(0,0) = 0"] = f"W_zz(0,0) = {wzz[0]:.3e}"
    if not np.all(wzzz > 0):
        failed["W_zzz(0,z) > 0"] = f"min W_zzz = {wzzz.min():.3e}"
    spread = float(np.max(state.v_field) - np.min(state.v_field))
    if spread > tol * max(1.0, abs(state.omega)) or abs(state.v_field[0] - state.omega) > tol * max(1.0, abs(state.omega)):
        failed["V0 = Omega"] = f"V spread {spread:.3e}"
    return failed


@dataclass
class WongCheck:
    holds: bool
    max_violation: float
    skipped: bool = False
    report: dict = field(default_factory=dict)


def wong_lower_bound_check(trajectory: Trajectory, rel_tol: float = 1e-4) -> WongCheck:
    """Check W_z(t, 1) >= 3 a / (3 - a t) with a = W_z(0, 1) along the run.

    Relative violation is (bound - W_z) / bound.  Data failing the hypotheses
    are reported and skipped.
    """
    failed = wong_hypotheses(trajectory.states[0])
    if failed:
        return WongCheck(holds=False, max_violation=math.nan, skipped=True, report=failed)
    a = trajectory.wz_top[0]
    t = trajectory.times - trajectory.times[0]
    valid = 3.0 - a * t > 0
    bound = 3.0 * a / (3.0 - a * t[valid])
    viol = (bound - trajectory.wz_top[valid]) / bound
    worst = float(max(0.0, np.max(viol)))
    return WongCheck(holds=worst <= rel_tol, max_violation=worst)


def wong_lemma_check(f, tol: float = 1e-10):
    """Check f(1) > 0 and int f^2 <= f(1)^2 / 3 for f on Chebyshev nodes.

    The hypotheses f'(0) = 0, f'' > 0 and int f = 0 are verified first; a
    :class:`HypothesisError` lists every one that fails.
    Returns ``(holds, lhs, rhs)``.
    """
    f = np.asarray(f, dtype=float)
    g = cheb_grid(len(f))
    fz = g.diff @ f
    fzz = g.diff2 @ f
    scale = max(1.0, float(np.max(np.abs(f))))
    failed = {}
    if abs(fz[0]) > 1e-8 * scale:
        failed["f'(0) = 0"] = f"f'(0) = {fz[0]:.3e}"
    if not np.all(fzz > 0):
        failed["f'' > 0"] = f"min f'' = {fzz.min():.3e}"
    mean = float(g.integrate(f))
    if abs(mean) > 1e-8 * scale:
        failed["int f = 0"] = f"int f = {mean:.3e}"
    if failed:
        raise HypothesisError(failed)
    lhs = float(g.integrate(f * f))
    rhs = float(f[-1] ** 2 / 3.0)
    return bool(f[-1] > 0 and lhs <= rhs + tol), lhs, rhs


# --- uniqueness / Groenwall diagnostic --------------------------------------------------------


def _sobolev_norms(state: ReducedState):
    g = state.cheb
    w, v = state.w_field, state.v_field
    wz = g.diff @ w
    wzz = g.diff2 @ w
    vz = g.diff @ v
    h2 = math.sqrt(g.integrate(w * w + wz * wz + wzz * wzz))
    h1 = math.sqrt(g.integrate(v * v + vz * vz))
    return h2, h1


def separation(sa: ReducedState, sb: ReducedState) -> float:
    if len(sa.grid) != len(sb.grid) or sa.omega != sb.omega:
        raise DomainError("states live on different grids or have different Omega")
    g = sa.cheb
    dwz = g.diff @ (sa.w_field - sb.w_field)
    dv = sa.v_field - sb.v_field
    return float(g.integrate(dwz * dwz + dv * dv))


@dataclass
class GronwallHistory:
    times: np.ndarray
    separation: np.ndarray
    envelope_integral: np.ndarray

    def envelope(self, constant: float) -> np.ndarray:
        return self.separation[0] * np.exp(constant * self.envelope_integral)

    def fitted_constant(self) -> float:
        """Smallest C with D(t) <= D(0) exp(C int (|W|_H2 + |V|_H1)) on this run."""
        d0 = self.separation[0]
        mask = self.envelope_integral > 0
        if d0 == 0.0 or not np.any(mask):
            return 0.0
        with np.errstate(divide="ignore"):
            ratios = np.log(self.separation[mask] / d0) / self.envelope_integral[mask]
        return float(max(0.0, np.max(ratios)))

    def sup_ratio(self, constant: float) -> float:
        env = self.envelope(constant)
        if self.separation[0] == 0.0:
            return 0.0 if np.all(self.separation == 0.0) else math.inf
        return float(np.max(self.separation / env))


def uniqueness_diagnostic(traj_a: Trajectory, traj_b: Trajectory) -> GronwallHistory:
    """Separation D(t) and the integral of ||W_bar||_H2 + ||V_bar||_H1.

    Both runs must have snapshots at the same times (use ``save_times``).
    """
    ta, tb = traj_a.snapshot_times(), traj_b.snapshot_times()
    if len(ta) != len(tb) or np.max(np.abs(ta - tb)) > 1e-12:
        raise DomainError("trajectories have different snapshot times")
    seps, rates = [], []
    for sa, sb in zip(traj_a.states, traj_b.states):
        seps.append(separation(sa, sb))
        mean = ReducedState(sa.time, sa.grid, 0.5 * (sa.w_field + sb.w_field),
                            0.5 * (sa.v_field + sb.v_field), sa.omega)
        h2, h1 = _sobolev_norms(mean)
        rates.append(h2 + h1)
    rates = np.array(rates)
    integral = np.concatenate([[0.0], np.cumsum(0.5 * (rates[1:] + rates[:-1]) * np.diff(ta))])
    return GronwallHistory(ta, np.array(seps), integral)
