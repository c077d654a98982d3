"""Levi-Civita connection of a metric field."""

from typing import Tuple

import numpy as np

from services.calculus.fields import MetricField, Point, VectorField, split_points
from services.calculus.jets import Number, as_array, partials
from services.calculus.operators import MetricAt

Symbols = Tuple[Tuple[Tuple[Number, ...], ...], ...]


def metric_partials(g: MetricField, point: Point):
    """``dg[l][a][b] = d_l g_ab``."""
    D = partials(lambda p: tuple(c for row in g(p) for c in row), point)
    return tuple(tuple(tuple(D[l][3 * a + b] for b in range(3)) for a in range(3)) for l in range(3))


def christoffel(g: MetricField, point: Point) -> Symbols:
    """``Gamma[i][j][k] = 1/2 g^il (d_j g_lk + d_k g_lj - d_l g_jk)``."""
    inv = MetricAt(g, point).inv
    dg = metric_partials(g, point)
    lowered = [[[0.5 * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]) for k in range(3)]
                for j in range(3)] for l in range(3)]
    return tuple(
        tuple(
            tuple(sum(inv[i][l] * lowered[l][j][k] for l in range(3)) for k in range(3))
            for j in range(3)
        )
        for i in range(3)
    )


def christoffel_array(g: MetricField, points: np.ndarray) -> np.ndarray:
    """Symbols at a batch, shape ``(N, 3, 3, 3)``."""
    n = len(points)
    gam = christoffel(g, split_points(points))
    return np.stack([
        np.stack([np.stack([as_array(gam[i][j][k], (n,)) for k in range(3)], axis=1) for j in range(3)], axis=1)
        for i in range(3)
    ], axis=1)


def vector_partials_array(X: VectorField, points: np.ndarray) -> np.ndarray:
    """``DX[n, j, i] = d_j X^i``."""
    n = len(points)
    D = partials(X, split_points(points))
    return np.stack([np.stack([as_array(c, (n,)) for c in row], axis=1) for row in D], axis=1)


def covariant_derivative_array(DX: np.ndarray, gamma: np.ndarray, X: np.ndarray, V: np.ndarray) -> np.ndarray:
    """``(nabla_V X)^i = V^j d_j X^i + Gamma^i_jk V^j X^k`` over a batch."""
    return np.einsum('nj,nji->ni', V, DX) + np.einsum('nijk,nj,nk->ni', gamma, V, X)
