"""Beta-family special functions and Gauss-Jacobi quadrature on (0, 1).

Everything here works in double precision and is a pure function of its
arguments, so it can be shared freely between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError

_EPS = np.finfo(float).eps
_TINY = 1e-300


def ln_gamma(x: float) -> float:
    """Natural logarithm of the Gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def beta(a: float, b: float) -> float:
    """Complete Beta function B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)."""
    if not (a > 0 and b > 0):
        raise DomainError(f"beta requires a, b > 0, got ({a!r}, {b!r})")
    if a + b < 170.0:
        # direct product is more accurate than exp(lgamma sums) when it cannot overflow
        return math.gamma(a) * math.gamma(b) / math.gamma(a + b)
    return math.exp(ln_beta(a, b))


def ln_beta(a: float, b: float) -> float:
    if not (a > 0 and b > 0):
        raise DomainError(f"ln_beta requires a, b > 0, got ({a!r}, {b!r})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _check_unit(x: float, name: str) -> None:
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"{name} requires 0 <= x <= 1, got {x!r}")


def _betacf(x: float, a: float, b: float, max_iter: int = 10_000) -> float:
    """Continued fraction for I(x; a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 4 * _EPS:
            return h
    raise ConvergenceError(f"beta continued fraction did not converge for x={x}, a={a}, b={b}")


def _prefactor(x: float, a: float, b: float) -> float:
    # x^a (1-x)^b / B(a, b)
    return math.exp(a * math.log(x) + b * math.log1p(-x) - ln_beta(a, b))


def beta_reg(x: float, a: float, b: float) -> float:
    """Regularized incomplete Beta function I(x; a, b).

    Evaluated by continued fraction, using the reflection
    I(x; a, b) = 1 - I(1 - x; b, a) when x > a / (a + b).
    """
    _check_unit(x, "beta_reg")
    if not (a > 0 and b > 0):
        raise DomainError(f"beta_reg requires a, b > 0, got ({a!r}, {b!r})")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    if x <= a / (a + b):
        return _prefactor(x, a, b) * _betacf(x, a, b) / a
    return 1.0 - _prefactor(x, a, b) * _betacf(1.0 - x, b, a) / b


def beta_reg_series(x: float, a: float, b: float, max_terms: int = 2_000_000) -> float:
    """Power-series form of the regularized Beta function.

    I(x; a, b) = x^a (1-x)^b / (a B(a, b)) * {1 + sum_{n>=0} B(a+1, n+1) / B(a+b, n+1) x^(n+1)}

    The term ratio is x (a+b+n) / (a+n+1), so convergence slows as x -> 1.
    """
    _check_unit(x, "beta_reg_series")
    if not (a > 0 and b > 0):
        raise DomainError(f"beta_reg_series requires a, b > 0, got ({a!r}, {b!r})")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    total = 1.0
    term = x * (a + b) / (a + 1.0)
    n = 0
    while n < max_terms:
        total += term
        if abs(term) <= 1e-17 * total:
            break
        n += 1
        term *= x * (a + b + n) / (a + n + 1.0)
    else:
        raise ConvergenceError(f"beta series did not converge in {max_terms} terms (x={x})")
    return _prefactor(x, a, b) / a * total


def beta_inc(x: float, a: float, b: float) -> float:
    """Incomplete Beta function B(x; a, b) = int_0^x t^(a-1) (1-t)^(b-1) dt."""
    _check_unit(x, "beta_inc")
    if not (a > 0 and b > 0):
        raise DomainError(f"beta_inc requires a, b > 0, got ({a!r}, {b!r})")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return beta(a, b)
    if x <= a / (a + b):
        # avoid the 1 - I cancellation: the lower tail is computed directly
        return math.exp(a * math.log(x) + b * math.log1p(-x)) * _betacf(x, a, b) / a
    return beta(a, b) * beta_reg(x, a, b)


# --- Gauss-Jacobi quadrature -------------------------------------------------


@dataclass(frozen=True)
class JacobiQuadrature:
    """Rule for int_0^1 f(t) t^left_exponent (1-t)^right_exponent dt."""

    node_count: int
    left_exponent: float
    right_exponent: float
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def _jacobi_and_derivative(n: int, alpha: float, beta_: float, x: np.ndarray):
    """P_n^(alpha, beta)(x) and its derivative by three-term recurrence."""

    def p(nn, al, be):
        p0 = np.ones_like(x)
        if nn == 0:
            return p0
        p1 = (al + 1.0) + (al + be + 2.0) * (x - 1.0) / 2.0
        for k in range(2, nn + 1):
            s = 2 * k + al + be
            a1 = 2 * k * (k + al + be) * (s - 2)
            a2 = (s - 1) * (al * al - be * be)
            a3 = (s - 2) * (s - 1) * s
            a4 = 2 * (k + al - 1) * (k + be - 1) * s
            p0, p1 = p1, ((a2 + a3 * x) * p1 - a4 * p0) / a1
        return p1

    val = p(n, alpha, beta_)
    der = 0.5 * (n + alpha + beta_ + 1.0) * p(n - 1, alpha + 1.0, beta_ + 1.0)
    return val, der


def _jacobi_nodes(n: int, alpha: float, beta_: float, tol: float = 1e-14, max_iter: int = 100):
    # simultaneous Newton with deflation (Aberth) from Chebyshev guesses
    x = -np.cos((2.0 * np.arange(n) + 1.0) * np.pi / (2.0 * n))
    for _ in range(max_iter):
        val, der = _jacobi_and_derivative(n, alpha, beta_, x)
        ratio = val / der
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, np.inf)
        deflate = np.sum(1.0 / diff, axis=1)
        step = ratio / (1.0 - ratio * deflate)
        x = x - step
        if np.max(np.abs(step)) <= tol:
            val, der = _jacobi_and_derivative(n, alpha, beta_, x)
            return x, der
    raise ConvergenceError(
        f"Gauss-Jacobi nodes did not converge in {max_iter} iterations "
        f"(n={n}, exponents=({beta_}, {alpha}))"
    )


@lru_cache(maxsize=128)
def _gauss_jacobi_cached(node_count: int, left_exponent: float, right_exponent: float):
    # on [-1, 1]: weight (1-x)^alpha (1+x)^beta, with t = (1+x)/2
    alpha, beta_ = right_exponent, left_exponent
    n = node_count
    x, der = _jacobi_nodes(n, alpha, beta_)
    log_const = (
        math.lgamma(n + alpha + 1.0)
        + math.lgamma(n + beta_ + 1.0)
        - math.lgamma(n + alpha + beta_ + 1.0)
        - math.lgamma(n + 1.0)
    )
    # the 2^(alpha+beta+1) of the [-1,1] rule cancels against the map to (0,1)
    w = math.exp(log_const) / ((1.0 - x * x) * der * der)
    t = 0.5 * (1.0 + x)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def gauss_jacobi(node_count: int, left_exponent: float, right_exponent: float) -> JacobiQuadrature:
    """Gauss-Jacobi rule on (0, 1) for the weight t^left (1-t)^right.

    Exact for polynomials of degree <= 2*node_count - 1.
    """
    if node_count < 1 or int(node_count) != node_count:
        raise DomainError(f"node_count must be a positive integer, got {node_count!r}")
    if not (left_exponent > -1 and right_exponent > -1):
        raise DomainError(
            f"exponents must exceed -1, got ({left_exponent!r}, {right_exponent!r})"
        )
    t, w = _gauss_jacobi_cached(int(node_count), float(left_exponent), float(right_exponent))
    return JacobiQuadrature(int(node_count), float(left_exponent), float(right_exponent), t, w)
