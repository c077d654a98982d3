"""3x3 linear algebra written out by cofactors so it runs on duals."""

from typing import Sequence, Tuple

import numpy as np

from services.calculus.jets import Number, primal
from utils.errors import SingularMetric

Vec = Tuple[Number, Number, Number]
Mat = Tuple[Vec, Vec, Vec]


def dot(a: Sequence[Number], b: Sequence[Number]) -> Number:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: Sequence[Number], b: Sequence[Number]) -> Vec:
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def matvec(m: Mat, v: Sequence[Number]) -> Vec:
    return tuple(dot(row, v) for row in m)


def transpose(m: Mat) -> Mat:
    return tuple(tuple(m[j][i] for j in range(3)) for i in range(3))


def matmul(a: Mat, b: Mat) -> Mat:
    bt = transpose(b)
    return tuple(tuple(dot(a[i], bt[j]) for j in range(3)) for i in range(3))


def quad(m: Mat, u: Sequence[Number], v: Sequence[Number]) -> Number:
    """``u^T m v``."""
    return dot(u, matvec(m, v))


def adjugate(m: Mat) -> Mat:
    cof = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != i]
            c = [k for k in range(3) if k != j]
            minor = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]]
            cof[i][j] = minor if (i + j) % 2 == 0 else -minor
    return transpose(tuple(tuple(row) for row in cof))


def det3(m: Mat) -> Number:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def inv3(m: Mat, det: Number = None) -> Mat:
    det = det3(m) if det is None else det
    adj = adjugate(m)
    inv_det = 1.0 / det
    return tuple(tuple(adj[i][j] * inv_det for j in range(3)) for i in range(3))


def scale(v: Sequence[Number], s: Number) -> Vec:
    return tuple(s * a for a in v)


def add(a: Sequence[Number], b: Sequence[Number]) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence[Number], b: Sequence[Number]) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def require_positive_definite(g: Mat, det: Number, name: str = 'g'):
    """Raise SingularMetric unless every leading minor is positive at every point."""
    d1 = np.asarray(primal(g[0][0]))
    d2 = np.asarray(primal(g[0][0] * g[1][1] - g[0][1] * g[1][0]))
    d3 = np.asarray(primal(det))
    worst = float(min(np.min(d1), np.min(d2), np.min(d3)))
    if not worst > 0:
        raise SingularMetric(f"Metric {name} is not positive-definite", {'min_leading_minor': worst})
