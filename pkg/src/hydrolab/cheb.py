"""Chebyshev-Lobatto collocation on [0, 1].

Nodes are returned in increasing order, ``z[0] = 0`` and ``z[-1] = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as npcheb

from .errors import DomainError


def lobatto_nodes(n_nodes: int) -> np.ndarray:
    n = n_nodes - 1
    theta = np.pi * np.arange(n_nodes) / n
    # 0.5 * (1 - cos theta) written as sin^2 for accuracy near z = 0
    return np.sin(theta / 2.0) ** 2


def diff_matrix(n_nodes: int) -> np.ndarray:
    """First-derivative collocation matrix on [0, 1]."""
    n = n_nodes - 1
    theta = np.pi * np.arange(n_nodes) / n
    c = np.ones(n_nodes)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n_nodes)
    ti, tj = np.meshgrid(theta, theta, indexing="ij")
    # z_i - z_j = (x_i - x_j) / 2, by the sine identity
    dx = np.sin((ti + tj) / 2.0) * np.sin((ti - tj) / 2.0)
    np.fill_diagonal(dx, 1.0)
    d = np.outer(c, 1.0 / c) / dx
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


def clenshaw_curtis_weights(n_nodes: int) -> np.ndarray:
    """Quadrature weights for int_0^1 on the Lobatto nodes."""
    n = n_nodes - 1
    theta = np.pi * np.arange(n_nodes) / n
    w = np.zeros(n_nodes)
    interior = slice(1, n)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = w[n] = 1.0 / (n * n - 1)
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k * k - 1)
        v -= np.cos(n * theta[interior]) / (n * n - 1)
    else:
        w[0] = w[n] = 1.0 / (n * n)
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * theta[interior]) / (4 * k * k - 1)
    w[interior] = 2.0 * v / n
    return 0.5 * w


@dataclass(frozen=True)
class ChebGrid:
    """Lobatto grid with the operators the solvers need.

    ``diff`` and ``diff2`` act on nodal values; ``weights`` integrate over
    [0, 1]; ``cumint`` maps values to the antiderivative vanishing at z = 0.
    """

    n_nodes: int
    z: np.ndarray
    diff: np.ndarray
    diff2: np.ndarray
    weights: np.ndarray
    cumint: np.ndarray
    to_coeffs: np.ndarray

    def integrate(self, f, axis: int = -1):
        return np.tensordot(f, self.weights, axes=([axis], [0]))

    def antiderivative(self, f, axis: int = -1):
        return np.moveaxis(np.tensordot(self.cumint, np.moveaxis(f, axis, 0), axes=1), 0, axis)

    def coeffs(self, f):
        """Chebyshev coefficients in the variable x = 2z - 1."""
        return self.to_coeffs @ f

    def spacing(self) -> np.ndarray:
        """Local node spacing, the smaller of the two neighbouring gaps."""
        gaps = np.diff(self.z)
        h = np.empty_like(self.z)
        h[0] = gaps[0]
        h[-1] = gaps[-1]
        h[1:-1] = np.minimum(gaps[:-1], gaps[1:])
        return h


def _transform_matrix(n_nodes: int) -> np.ndarray:
    n = n_nodes - 1
    x = 2.0 * lobatto_nodes(n_nodes) - 1.0
    cbar = np.ones(n_nodes)
    cbar[0] = cbar[-1] = 2.0
    vander = npcheb.chebvander(x, n)  # vander[j, k] = T_k(x_j)
    return (2.0 / n) * vander.T / np.outer(cbar, cbar)


def _cumint_matrix(n_nodes: int, to_coeffs: np.ndarray) -> np.ndarray:
    n = n_nodes - 1
    x = 2.0 * lobatto_nodes(n_nodes) - 1.0
    integ = np.zeros((n + 2, n + 1))
    eye = np.eye(n + 1)
    for k in range(n + 1):
        integ[:, k] = npcheb.chebint(eye[k], lbnd=-1.0)
    vander = npcheb.chebvander(x, n + 1)
    # dz = dx / 2; the lower limit is z = 0, so the first row vanishes exactly
    out = 0.5 * vander @ integ @ to_coeffs
    out[0] = 0.0
    return out


@lru_cache(maxsize=32)
def cheb_grid(n_nodes: int) -> ChebGrid:
    if n_nodes < 3:
        raise DomainError(f"need at least 3 Chebyshev nodes, got {n_nodes}")
    z = lobatto_nodes(n_nodes)
    d = diff_matrix(n_nodes)
    tc = _transform_matrix(n_nodes)
    grid = ChebGrid(
        n_nodes=n_nodes,
        z=z,
        diff=d,
        diff2=d @ d,
        weights=clenshaw_curtis_weights(n_nodes),
        cumint=_cumint_matrix(n_nodes, tc),
        to_coeffs=tc,
    )
    for arr in (grid.z, grid.diff, grid.diff2, grid.weights, grid.cumint, grid.to_coeffs):
        arr.setflags(write=False)
    return grid
