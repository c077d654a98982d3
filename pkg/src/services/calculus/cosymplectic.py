"""Cosymplectic pairs, their Reeb fields, and the metric/pair correspondence."""

from typing import Dict, Tuple

import numpy as np

from config.constants import TOLERANCES
from services.calculus.fields import (CosymplecticPair, MetricField, OneForm, Point, TwoForm, VectorField,
                                      split_points)
from services.calculus.jets import as_array, primal, sqrt
from services.calculus.linalg import cross, dot, inv3, scale, sub
from services.calculus.operators import MetricAt, ext_d, flat, hodge_star, wedge
from utils.errors import DegeneratePair, VanishingField


def _max_abs(field, points: np.ndarray) -> float:
    return float(np.max(np.abs(field.at(points))))


def reeb_solve(pair: CosymplecticPair, point: Point, tol: float = TOLERANCES['vanishing']) -> Tuple:
    """Unique ``Y`` with ``alpha(Y) = 1`` and ``i_Y omega = 0``.

    ``omega = i_W vol`` forces ``Y`` parallel to ``W``, so ``Y = W / alpha(W)``.
    """
    a = pair.alpha(point)
    W = pair.omega(point)
    volume = dot(a, W)
    worst = float(np.min(np.abs(np.asarray(primal(volume), dtype=float))))
    if worst <= tol:
        raise DegeneratePair("alpha ^ omega vanishes", {'min_abs_volume': worst, 'pair': pair.label})
    return scale(W, 1.0 / volume)


def reeb_field(pair: CosymplecticPair) -> VectorField:
    return VectorField(lambda p: reeb_solve(pair, p), f'reeb_{pair.label}')


def pair_residuals(pair: CosymplecticPair, points: np.ndarray) -> Dict[str, float]:
    """Closedness of both forms and the minimum of the ``alpha ^ omega`` coefficient."""
    volume = wedge(pair.alpha, pair.omega).at(points)[:, 0]
    return {
        'sample_count': len(points),
        'd_alpha_max': _max_abs(ext_d(pair.alpha), points),
        'd_omega_max': _max_abs(ext_d(pair.omega), points),
        'volume_min': float(np.min(volume)),
    }


def pair_from_metric(X: VectorField, g: MetricField, points: np.ndarray,
                     tol: float = TOLERANCES['vanishing']) -> Tuple[CosymplecticPair, Dict[str, float]]:
    """``(X_flat, *X_flat)`` with closedness residuals and the positivity identity."""
    points = np.asarray(points, dtype=float)
    norms = np.sqrt(np.abs(np.einsum('ni,nij,nj->n', X.at(points), g.at(points), X.at(points))))
    if np.min(norms) < tol:
        worst = int(np.argmin(norms))
        raise VanishingField("Vector field vanishes at a sample", {
            'point': points[worst].tolist(), 'norm': float(norms[worst])})

    alpha = flat(g, X)
    omega = hodge_star(g, alpha)
    pair = CosymplecticPair(alpha, omega, f'{X.name}_dual')

    def positivity_defect(p):
        m = MetricAt(g, p)
        Xp = X(p)
        wedge_coef = dot(alpha(p), omega(p))
        return (wedge_coef - m.inner(Xp, Xp) * m.vol,)

    n = len(points)
    wedge_values = wedge(alpha, omega).at(points)[:, 0]
    report = {
        'sample_count': n,
        'd_alpha_max': _max_abs(ext_d(alpha), points),
        'd_star_alpha_max': _max_abs(ext_d(omega), points),
        'positivity_defect_max': float(np.max(np.abs(as_array(positivity_defect(split_points(points))[0], (n,))))),
        'volume_min': float(np.min(wedge_values)),
    }
    return pair, report


def _frame(pair: CosymplecticPair, point: Point, tol: float):
    """Columns ``(f1, f2, Y)``: an oriented orthonormal frame for the metric built from the pair."""
    a = pair.alpha(point)
    W = pair.omega(point)
    volume = dot(a, W)
    vol_min = float(np.min(np.asarray(primal(volume), dtype=float)))
    wt_min = float(np.min(np.asarray(primal(W[2]), dtype=float)))
    if vol_min <= tol:
        raise DegeneratePair("alpha ^ omega is not a positive volume form", {'min_volume': vol_min})
    if wt_min <= tol:
        raise DegeneratePair("Reeb field is tangent to t = const", {'min_omega_xy': wt_min})

    Y = scale(W, 1.0 / volume)
    # project d_x, d_y onto ker(alpha) along Y
    e1 = sub((1.0, 0.0, 0.0), scale(Y, a[0]))
    e2 = sub((0.0, 1.0, 0.0), scale(Y, a[1]))
    u1 = scale(e1, 1.0 / sqrt(dot(e1, e1)))
    v = sub(e2, scale(u1, dot(e2, u1)))
    u2 = scale(v, 1.0 / sqrt(dot(v, v)))
    sigma = 1.0 / sqrt(dot(W, cross(u1, u2)))
    f1 = scale(u1, sigma)
    f2 = scale(u2, sigma)
    return f1, f2, Y


def metric_from_pair(pair: CosymplecticPair, tol: float = TOLERANCES['vanishing']) -> MetricField:
    """Metric with ``Y`` unit and normal to ``ker alpha`` and area form ``omega`` on ``ker alpha``."""
    def fn(p):
        f1, f2, Y = _frame(pair, p, tol)
        E = tuple((f1[i], f2[i], Y[i]) for i in range(3))
        Einv = inv3(E)
        return tuple(tuple(sum(Einv[k][a] * Einv[k][b] for k in range(3)) for b in range(3)) for a in range(3))
    return MetricField(fn, f'g_{pair.label}')


def metric_pair_residuals(pair: CosymplecticPair, g: MetricField, points: np.ndarray) -> Dict[str, float]:
    """``*alpha - omega``, ``|Y|_g - 1`` and ``vol_g - alpha ^ omega`` over samples."""
    points = np.asarray(points, dtype=float)
    star_alpha = hodge_star(g, pair.alpha).at(points)
    omega = pair.omega.at(points)
    Y = reeb_field(pair).at(points)
    G = g.at(points)
    unit = np.sqrt(np.einsum('ni,nij,nj->n', Y, G, Y))
    volume = wedge(pair.alpha, pair.omega).at(points)[:, 0]
    return {
        'sample_count': len(points),
        'star_alpha_minus_omega_max': float(np.max(np.abs(star_alpha - omega))),
        'reeb_unit_defect_max': float(np.max(np.abs(unit - 1.0))),
        'volume_defect_max': float(np.max(np.abs(np.sqrt(np.linalg.det(G)) - volume))),
    }


def flat_pair(c: float = 1.0) -> CosymplecticPair:
    """``(c dt, dx ^ dy)``."""
    return CosymplecticPair(OneForm(lambda p: (0.0, 0.0, c), 'c_dt'),
                            TwoForm(lambda p: (0.0, 0.0, 1.0), 'dx^dy'), 'ambient')
