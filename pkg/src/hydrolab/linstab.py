"""Linear stability of hydrostatic shear flows.

A normal mode psi = chi(z) exp(i k (x - c t)) of

    d_t psi_zz + U psi_xzz - U'' psi_x = 0,   psi(0) = psi(1) = 0

exists when F(c) = int_0^1 (U - c)^-2 dz = 0, with
chi = K (U - c) int_0^z (U - c)^-2.  Growth rates are k Im(c), where
k = 2 pi n for the n-th Fourier mode of a period-1 channel.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .cheb import cheb_grid
from .errors import DomainError, PoleProximityError, RootFindingError

POLE_DISTANCE = 1e-10


@dataclass(frozen=True)
class ShearProfile:
    """Background shear U(z) on [0, 1].

    ``tanh``: U = tanh((z - 1/2) / d); ``two_layer``: U = a below z = 1/2 and
    b above; ``tabulated``: cubic-spline interpolation of (z, U, U'') samples.
    """

    family: str
    d: float = 0.0
    a: float = 0.0
    b: float = 0.0
    samples: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.family == "tanh":
            if not self.d > 0:
                raise DomainError(f"tanh width d must be positive, got {self.d!r}")
        elif self.family == "two_layer":
            pass
        elif self.family == "tabulated":
            if self.samples is None:
                raise DomainError("tabulated profile needs (z, U, U'') samples")
            z = np.asarray(self.samples[0], dtype=float)
            if np.any(np.diff(z) <= 0) or z[0] > 0.0 or z[-1] < 1.0:
                raise DomainError("tabulated z must be strictly increasing and cover [0, 1]")
        else:
            raise DomainError(f"unknown shear family {self.family!r}")

    @classmethod
    def tanh(cls, d: float) -> "ShearProfile":
        return cls("tanh", d=float(d))

    @classmethod
    def two_layer(cls, a: float, b: float) -> "ShearProfile":
        return cls("two_layer", a=float(a), b=float(b))

    @classmethod
    def tabulated(cls, z, u, u2) -> "ShearProfile":
        return cls("tabulated", samples=(tuple(map(float, z)), tuple(map(float, u)), tuple(map(float, u2))))

    @classmethod
    def constant(cls, u0: float, n: int = 5) -> "ShearProfile":
        z = np.linspace(0.0, 1.0, n)
        return cls.tabulated(z, np.full(n, u0), np.zeros(n))

    def _splines(self):
        return _splines(self.samples)

    def u(self, z):
        z = np.asarray(z, dtype=float)
        if self.family == "tanh":
            return np.tanh((z - 0.5) / self.d)
        if self.family == "two_layer":
            return np.where(z < 0.5, self.a, self.b)
        return self._splines()[0](z)

    def u1(self, z):
        z = np.asarray(z, dtype=float)
        if self.family == "tanh":
            return 1.0 / (self.d * np.cosh((z - 0.5) / self.d) ** 2)
        if self.family == "two_layer":
            return np.zeros_like(z)
        return self._splines()[0](z, 1)

    def u2(self, z):
        z = np.asarray(z, dtype=float)
        if self.family == "tanh":
            s = (z - 0.5) / self.d
            return -2.0 * np.tanh(s) / (self.d ** 2 * np.cosh(s) ** 2)
        if self.family == "two_layer":
            return np.zeros_like(z)
        return self._splines()[1](z)

    def u_range(self) -> tuple[float, float]:
        if self.family == "tanh":
            lo = math.tanh(-0.5 / self.d)
            return lo, -lo
        if self.family == "two_layer":
            return min(self.a, self.b), max(self.a, self.b)
        u = np.asarray(self.samples[1])
        zz = np.linspace(0.0, 1.0, 2001)
        uu = self.u(zz)
        return float(min(u.min(), uu.min())), float(max(u.max(), uu.max()))


@lru_cache(maxsize=16)
def _splines(samples):
    z, u, u2 = (np.asarray(s, dtype=float) for s in samples)
    return CubicSpline(z, u), CubicSpline(z, u2)


@lru_cache(maxsize=16)
def _knot_rule(knots, order: int = 16):
    """Composite Gauss-Legendre rule on [0, 1] with panels between spline knots.

    U is a cubic on each panel, so the integrand is analytic there and the
    panel rule converges geometrically.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.clip(np.asarray(knots, dtype=float), 0.0, 1.0)
    edges = np.unique(np.concatenate([[0.0], edges, [1.0]]))
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    z = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    return z.ravel(), (half[:, None] * w[None, :]).ravel()


def pole_distance(profile: ShearProfile, c: complex) -> float:
    lo, hi = profile.u_range()
    re = min(max(c.real, lo), hi)
    return abs(complex(re, 0.0) - c)


def _check_pole(profile: ShearProfile, c: complex) -> None:
    dist = pole_distance(profile, c)
    if dist <= POLE_DISTANCE:
        raise PoleProximityError(
            f"c={c} lies within {dist:.2e} of the range of U; integrand is singular"
        )


def dispersion_integral(profile: ShearProfile, c: complex) -> complex:
    """F(c) = int_0^1 (U(z) - c)^-2 dz.

    Closed form for two layers, knot-panel Gauss-Legendre for tabulated
    profiles, adaptive quadrature otherwise.
    """
    c = complex(c)
    _check_pole(profile, c)
    if profile.family == "two_layer":
        return 0.5 * ((profile.a - c) ** -2 + (profile.b - c) ** -2)
    if profile.family == "tabulated":
        z, w = _knot_rule(profile.samples[0])
        return complex(np.dot(w, (profile.u(z) - c) ** -2))

    def f(z):
        return (profile.u(z) - c) ** -2

    pts = [0.5] if profile.family == "tanh" else None
    kw = dict(epsabs=1e-14, epsrel=1e-13, limit=400, points=pts)
    # near a root F cancels to roundoff, which quad reports as a warning;
    # accuracy is checked against closed forms in the tests instead
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, _ = integrate.quad(lambda z: f(z).real, 0.0, 1.0, **kw)
        im, _ = integrate.quad(lambda z: f(z).imag, 0.0, 1.0, **kw)
    return complex(re, im)


def two_layer_root_closed_form(a: float, b: float) -> tuple[complex, complex]:
    """Roots (a + b)/2 +- i (a - b)/2 of the two-layer dispersion relation."""
    if a == b:
        raise DomainError("two-layer roots need a != b")
    mid = 0.5 * (a + b)
    half = 0.5 * (a - b)
    return complex(mid, half), complex(mid, -half)


@dataclass(frozen=True)
class DispersionRoot:
    c: complex
    residual: float
    purely_imaginary: bool

    @property
    def beta(self) -> float:
        return self.c.imag


# --- argument-principle search -------------------------------------------------------


@dataclass(frozen=True)
class Box:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def contains(self, c: complex, pad: float = 0.0) -> bool:
        return (self.re_min - pad <= c.real <= self.re_max + pad
                and self.im_min - pad <= c.imag <= self.im_max + pad)

    def corners(self):
        return [complex(self.re_min, self.im_min), complex(self.re_max, self.im_min),
                complex(self.re_max, self.im_max), complex(self.re_min, self.im_max)]

    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def split(self):
        # off-centre cut so symmetric roots do not land on a cut line
        r = self.re_min + 0.5123 * (self.re_max - self.re_min)
        i = self.im_min + 0.4877 * (self.im_max - self.im_min)
        return [Box(self.re_min, r, self.im_min, i), Box(r, self.re_max, self.im_min, i),
                Box(self.re_min, r, i, self.im_max), Box(r, self.re_max, i, self.im_max)]


def _edge_winding(func, p0: complex, p1: complex, f0: complex, f1: complex, depth: int = 0) -> float:
    dphi = np.angle(f1 / f0)
    if abs(dphi) < np.pi / 8 or depth > 30:
        return dphi
    pm = 0.5 * (p0 + p1)
    fm = func(pm)
    return _edge_winding(func, p0, pm, f0, fm, depth + 1) + _edge_winding(func, pm, p1, fm, f1, depth + 1)


def winding_number(func, box: Box, samples_per_edge: int = 16) -> float:
    """Total change of arg F around the box boundary, divided by 2 pi."""
    corners = box.corners() + [box.corners()[0]]
    total = 0.0
    for p0, p1 in zip(corners[:-1], corners[1:]):
        pts = [p0 + (p1 - p0) * s for s in np.linspace(0.0, 1.0, samples_per_edge + 1)]
        vals = [func(p) for p in pts]
        for a, b, fa, fb in zip(pts[:-1], pts[1:], vals[:-1], vals[1:]):
            total += _edge_winding(func, a, b, fa, fb)
    return total / (2.0 * np.pi)


def _newton(func, c0: complex, tol: float = 1e-13, max_iter: int = 60):
    c = c0
    fc = func(c)
    for _ in range(max_iter):
        h = 1e-6 * max(1.0, abs(c))
        deriv = (func(c + h) - func(c - h)) / (2.0 * h)
        if deriv == 0:
            break
        step = fc / deriv
        c = c - step
        fc = func(c)
        if abs(step) < tol * max(1.0, abs(c)):
            return c, abs(fc)
    return c, abs(fc)


def find_roots(
    profile: ShearProfile,
    search_box: Box | tuple,
    max_depth: int = 8,
    residual_tol: float = 1e-10,
) -> list[DispersionRoot]:
    """All zeros of F inside ``search_box``.

    The box boundary winding number counts the zeros (F has no poles off the
    range of U); boxes holding more than one zero are subdivided, single-zero
    boxes are polished by Newton's method with a central-difference F'.
    """
    box = search_box if isinstance(search_box, Box) else Box(*search_box)
    lo, hi = profile.u_range()
    if box.im_min <= 0.0 <= box.im_max and box.re_min <= hi and box.re_max >= lo:
        raise DomainError("search box intersects the real range of U")

    def func(c):
        return dispersion_integral(profile, c)

    roots: list[complex] = []

    def search(b: Box, depth: int) -> None:
        w = winding_number(func, b)
        count = int(round(w))
        if abs(w - count) > 0.1:
            raise RootFindingError(f"non-integer winding number {w:.3f} on {b}")
        if count == 0:
            return
        if count == 1:
            c, res = _newton(func, b.center())
            size = max(b.re_max - b.re_min, b.im_max - b.im_min)
            if res < residual_tol and b.contains(c, pad=1e-9 * size):
                roots.append(c)
                return
        if depth >= max_depth:
            raise RootFindingError(
                f"could not isolate {count} root(s) in {b} after {max_depth} subdivisions"
            )
        for sub in b.split():
            search(sub, depth + 1)

    total = int(round(winding_number(func, box)))
    search(box, 0)
    # a root on a shared cut line may be found from two sub-boxes
    unique: list[complex] = []
    for c in roots:
        if all(abs(c - u) > 1e-8 for u in unique):
            unique.append(c)
    if len(unique) != total:
        raise RootFindingError(f"winding number {total} but {len(unique)} roots located")
    out = []
    for c in sorted(unique, key=lambda c: (c.imag, c.real)):
        if abs(c.real) < 1e-8:
            # symmetric profiles: snap and re-polish on the imaginary axis
            c_axis = complex(0.0, c.imag)
            if abs(func(c_axis)) <= abs(func(c)):
                c = c_axis
        res = abs(func(c))
        out.append(DispersionRoot(c, res, abs(c.real) < 1e-8))
    return out


# --- eigenfunction ----------------------------------------------------------------------------


@dataclass(frozen=True)
class Eigenfunction:
    """chi on two Chebyshev panels [0, 1/2] and [1/2, 1].

    The panels cluster nodes at the shear layer in the middle of the channel;
    ``grid`` and ``chi`` hold both panels with the shared midpoint once.
    """

    grid: np.ndarray
    chi: np.ndarray
    normalization: float
    c: complex
    panel_nodes: int

    def _panels(self, f):
        n = self.panel_nodes
        return f[:n], f[n - 1:]

    def derivatives(self):
        """(chi', chi'') by panel-wise spectral differentiation."""
        g = cheb_grid(self.panel_nodes)
        out1, out2 = [], []
        for j, piece in enumerate(self._panels(self.chi)):
            d1 = 2.0 * (g.diff @ piece)
            d2 = 4.0 * (g.diff2 @ piece)
            out1.append(d1 if j == 0 else d1[1:])
            out2.append(d2 if j == 0 else d2[1:])
        return np.concatenate(out1), np.concatenate(out2)

    def ode_residual(self, profile: ShearProfile) -> np.ndarray:
        """(U - c) chi'' - U'' chi on the grid."""
        _, chi2 = self.derivatives()
        return (profile.u(self.grid) - self.c) * chi2 - profile.u2(self.grid) * self.chi


PANEL_LADDER = (33, 49, 65, 97, 129, 193, 257)


def _chi_panels(profile: ShearProfile, c: complex, n_nodes: int):
    g = cheb_grid(n_nodes)
    z_lo = 0.5 * g.z
    z_hi = 0.5 + 0.5 * g.z
    inner_lo = 0.5 * (g.cumint @ ((profile.u(z_lo) - c) ** -2))
    inner_hi = inner_lo[-1] + 0.5 * (g.cumint @ ((profile.u(z_hi) - c) ** -2))
    chi_lo = (profile.u(z_lo) - c) * inner_lo
    chi_hi = (profile.u(z_hi) - c) * inner_hi
    return g, (z_lo, z_hi), (chi_lo, chi_hi)


def _resolved(g, pieces, tol: float = 1e-13) -> bool:
    for piece in pieces:
        coef = np.abs(g.coeffs(piece))
        if np.max(coef[-6:]) > tol * np.max(coef):
            return False
    return True


def eigenfunction_chi(profile: ShearProfile, c: complex, K: float | None = None, n_nodes: int | None = None) -> Eigenfunction:
    """chi = K (U - c) int_0^z (U - c)^-2, with ``n_nodes`` per panel.

    ``n_nodes=None`` takes the smallest panel size whose Chebyshev tail has
    decayed to roundoff; extra nodes only add differentiation roundoff.
    With ``K=None`` the constant is chosen so that max |chi| = 1.
    """
    c = complex(c)
    _check_pole(profile, c)
    ladder = PANEL_LADDER if n_nodes is None else (int(n_nodes),)
    for n in ladder:
        g, (z_lo, z_hi), (chi_lo, chi_hi) = _chi_panels(profile, c, n)
        if n_nodes is not None or _resolved(g, (chi_lo, chi_hi)):
            break
    z = np.concatenate([z_lo, z_hi[1:]])
    chi = np.concatenate([chi_lo, chi_hi[1:]])
    if K is None:
        K = 1.0 / float(np.max(np.abs(chi)))
    return Eigenfunction(z, K * chi, float(K), c, n)


# --- linearized single-mode evolution --------------------------------------------------------


@lru_cache(maxsize=8)
def _dirichlet_solver(n_nodes: int) -> np.ndarray:
    """Matrix taking q to psi with psi_zz = q inside and psi = 0 at the walls."""
    g = cheb_grid(n_nodes)
    inner = slice(1, n_nodes - 1)
    solve = np.zeros((n_nodes, n_nodes))
    solve[inner, inner] = np.linalg.inv(g.diff2[inner, inner])
    solve.setflags(write=False)
    return solve


def _rayleigh_operator(profile: ShearProfile, n_nodes: int) -> np.ndarray:
    """M with d_t q = -i k M q, M = diag(U) - diag(U'') G."""
    g = cheb_grid(n_nodes)
    solve = _dirichlet_solver(n_nodes)
    return np.diag(profile.u(g.z)) - profile.u2(g.z)[:, None] * solve


@dataclass
class GrowthEstimate:
    n: int
    sigma: float
    unstable: bool
    window: tuple
    times: np.ndarray = field(repr=False)
    log_norm: np.ndarray = field(repr=False)
    final_q: np.ndarray = field(repr=False)
    final_psi: np.ndarray = field(repr=False)

    @property
    def amplification(self) -> float:
        return float(np.exp(self.log_norm[-1] - self.log_norm[0]))


def _l2(g, f) -> float:
    return math.sqrt(float(g.integrate(np.abs(f) ** 2)))


def fit_growth_window(times, log_norm, rel_var: float = 0.01, min_samples: int = 8):
    """Slope of log-norm over the trailing window where the local slope is steady.

    Returns ``(sigma, (t_start, t_end))``; ``sigma`` is None when no steady
    positive growth is found.
    """
    t = np.asarray(times)
    y = np.asarray(log_norm)
    if len(t) < min_samples + 2:
        return None, (t[0], t[-1])
    local = np.gradient(y, t)
    tail = max(min_samples // 2, len(t) // 20)
    s_end = float(np.mean(local[-tail:]))
    if not s_end > 1e-10:
        return None, (t[0], t[-1])
    ok = np.abs(local - s_end) <= rel_var * abs(s_end)
    start = len(t) - 1
    while start > 0 and ok[start - 1]:
        start -= 1
    if len(t) - start < min_samples:
        return None, (t[start], t[-1])
    slope, _ = np.polyfit(t[start:], y[start:], 1)
    return float(slope), (float(t[start]), float(t[-1]))


def linearized_evolution(
    profile: ShearProfile,
    n: int,
    psi0,
    t_end: float,
    n_nodes: int = 257,
    samples: int = 400,
) -> GrowthEstimate:
    """Evolve one Fourier mode of the linearized stream-function equation.

    d_t q = -i k (U q - U'' psi), q = psi_zz, psi(0) = psi(1) = 0, k = 2 pi n,
    by RK4.  The growth rate is the slope of log ||q||_L2 over the window where
    that slope is steady; a stable run reports sigma = 0 with unstable=False.
    """
    if n < 1:
        raise DomainError("Fourier index n must be positive")
    g = cheb_grid(n_nodes)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (n_nodes,):
        raise DomainError(f"psi0 must have {n_nodes} entries")
    if max(abs(psi0[0]), abs(psi0[-1])) > 1e-12 * max(1.0, np.max(np.abs(psi0))):
        raise DomainError("psi0 must vanish at z = 0 and z = 1")
    k = 2.0 * np.pi * n
    m = _rayleigh_operator(profile, n_nodes)
    op = -1j * k * m
    radius = float(np.max(np.abs(np.linalg.eigvals(m)))) * k
    solve = _dirichlet_solver(n_nodes)
    q = g.diff2 @ psi0
    n_steps = max(samples, int(math.ceil(t_end * radius / 1.0)))
    dt = t_end / n_steps
    stride = max(1, n_steps // samples)
    times = [0.0]
    logs = [math.log(_l2(g, q))]
    for j in range(1, n_steps + 1):
        k1 = op @ q
        k2 = op @ (q + 0.5 * dt * k1)
        k3 = op @ (q + 0.5 * dt * k2)
        k4 = op @ (q + dt * k3)
        q = q + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if j % stride == 0 or j == n_steps:
            times.append(j * dt)
            logs.append(math.log(_l2(g, q)))
    times = np.array(times)
    logs = np.array(logs)
    sigma, window = fit_growth_window(times, logs)
    unstable = sigma is not None
    return GrowthEstimate(n, sigma if unstable else 0.0, unstable, window, times, logs, q, solve @ q)


def growth_linearity_check(sigmas):
    """Fit sigma_n = 2 pi beta n through the origin.

    ``sigmas`` is a sequence of (n, sigma_n).  Returns
    ``(beta_fit, max_relative_deviation)``.
    """
    pts = [(float(n), float(s)) for n, s in sigmas if s > 0]
    if len({n for n, _ in pts}) < 3:
        raise DomainError("need at least 3 distinct n with positive growth rates")
    ns = np.array([p[0] for p in pts])
    ss = np.array([p[1] for p in pts])
    beta_fit = float(np.dot(ns, ss) / (2.0 * np.pi * np.dot(ns, ns)))
    dev = float(np.max(np.abs(ss / (2.0 * np.pi * ns * beta_fit) - 1.0)))
    return beta_fit, dev


def default_psi0(n_nodes: int, seed: int = 0) -> np.ndarray:
    """Random smooth stream function vanishing at both walls."""
    rng = np.random.default_rng(seed)
    z = cheb_grid(n_nodes).z
    coef = rng.standard_normal(6) / (1.0 + np.arange(6)) ** 2
    return sum(cj * np.sin((j + 1) * np.pi * z) for j, cj in enumerate(coef)).astype(complex)


# --- tables ---------------------------------------------------------------------------------


def write_root_table(path, rows) -> Path:
    """rows: iterable of (profile, DispersionRoot)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["family", "d", "re_c", "im_c", "residual"])
        for prof, root in rows:
            w.writerow([prof.family, f"{prof.d:.17g}", f"{root.c.real:.17g}",
                        f"{root.c.imag:.17g}", f"{root.residual:.17g}"])
    return path


def write_growth_table(path, rows, beta: float) -> Path:
    """rows: iterable of (n, sigma)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "sigma", "two_pi_n_beta", "rel_dev"])
        for n, s in rows:
            ref = 2.0 * np.pi * n * beta
            w.writerow([n, f"{s:.17g}", f"{ref:.17g}", f"{(s / ref - 1.0):.17g}"])
    return path


def eigenfunction_on_grid(profile: ShearProfile, c: complex, n_nodes: int) -> np.ndarray:
    """chi (max |chi| = 1) on the single Chebyshev grid used by the evolution."""
    c = complex(c)
    _check_pole(profile, c)
    g = cheb_grid(n_nodes)
    uc = profile.u(g.z) - c
    chi = uc * (g.cumint @ (uc ** -2))
    chi[0] = chi[-1] = 0.0
    return chi / np.max(np.abs(chi))
