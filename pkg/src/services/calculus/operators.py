"""Exterior calculus and Hodge theory on a coordinate chart."""

from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from config.constants import FD_STEP
from services.calculus.fields import (DifferentialForm, MetricField, OneForm, Point, ScalarField, ThreeForm,
                                      TwoForm, VectorField, form_of_degree, split_points)
from services.calculus.jets import Number, as_array, partials, sqrt
from services.calculus.linalg import (adjugate, cross, det3, dot, inv3, matvec, quad,
                                      require_positive_definite)
from utils.errors import DegreeError


def _require_form(form, degrees: Sequence[int], op: str):
    if not isinstance(form, DifferentialForm) or form.degree not in degrees:
        degree = getattr(form, 'degree', type(form).__name__)
        raise DegreeError(f"{op} is not defined on forms of degree {degree}", {'degree': degree, 'op': op})


# exterior derivative

def d_components(form: DifferentialForm, point: Point) -> Tuple:
    """Coefficients of ``d form`` at a point."""
    D = partials(form, point)  # D[j][c] = d_j form_c
    if form.degree == 0:
        return (D[0][0], D[1][0], D[2][0])
    if form.degree == 1:
        return (D[1][2] - D[2][1], D[2][0] - D[0][2], D[0][1] - D[1][0])
    return (D[0][0] + D[1][1] + D[2][2],)


def ext_d(form: DifferentialForm) -> DifferentialForm:
    _require_form(form, (0, 1, 2), 'ext_d')
    return form_of_degree(form.degree + 1, lambda p: d_components(form, p), f'd{form.name}')


# wedge and contraction

def wedge_components(a: Tuple, da: int, b: Tuple, db: int) -> Tuple:
    if da == 0:
        return tuple(a[0] * c for c in b)
    if db == 0:
        return tuple(b[0] * c for c in a)
    if da == 1 and db == 1:
        return cross(a, b)
    return (dot(a, b),)


def wedge(a: DifferentialForm, b: DifferentialForm) -> DifferentialForm:
    if not isinstance(a, DifferentialForm) or not isinstance(b, DifferentialForm):
        raise DegreeError("wedge needs two forms")
    if a.degree + b.degree > 3:
        raise DegreeError("wedge degree exceeds the dimension", {'degrees': [a.degree, b.degree]})
    return form_of_degree(a.degree + b.degree,
                          lambda p: wedge_components(a(p), a.degree, b(p), b.degree),
                          f'{a.name}^{b.name}')


def interior_components(X: Tuple, form: Tuple, degree: int) -> Tuple:
    if degree == 1:
        return (dot(X, form),)
    if degree == 2:
        # form = i_W(vol), so i_X form = W x X
        return cross(form, X)
    return tuple(form[0] * c for c in X)


def interior(X: VectorField, form: DifferentialForm) -> DifferentialForm:
    _require_form(form, (1, 2, 3), 'interior')
    return form_of_degree(form.degree - 1,
                          lambda p: interior_components(X(p), form(p), form.degree),
                          f'i_{X.name}{form.name}')


# metric operators

class MetricAt:
    """Metric quantities at one (batched) point, computed once."""

    def __init__(self, g: MetricField, point: Point):
        self.G = g(point)
        self.det = det3(self.G)
        require_positive_definite(self.G, self.det, g.name)
        self.inv = inv3(self.G, self.det)
        self.vol = sqrt(self.det)

    def star(self, comps: Tuple, degree: int) -> Tuple:
        s = self.vol
        if degree == 0:
            return (comps[0] * s,)
        if degree == 1:
            return tuple(s * c for c in matvec(self.inv, comps))
        if degree == 2:
            inv_s = 1.0 / s
            return tuple(inv_s * c for c in matvec(self.G, comps))
        return (comps[0] / s,)

    def flat(self, X: Tuple) -> Tuple:
        return matvec(self.G, X)

    def sharp(self, a: Tuple) -> Tuple:
        return matvec(self.inv, a)

    def inner(self, X: Tuple, Y: Tuple) -> Number:
        return quad(self.G, X, Y)


def hodge_star(g: MetricField, form: DifferentialForm) -> DifferentialForm:
    _require_form(form, (0, 1, 2, 3), 'hodge_star')
    return form_of_degree(3 - form.degree, lambda p: MetricAt(g, p).star(form(p), form.degree),
                          f'*{form.name}')


def codifferential(g: MetricField, form: DifferentialForm) -> DifferentialForm:
    """``d* = (-1)^k * d *`` on k-forms."""
    _require_form(form, (1, 2, 3), 'codifferential')
    sign = -1.0 if form.degree % 2 else 1.0
    result = hodge_star(g, ext_d(hodge_star(g, form)))
    return result.scaled(sign) if sign < 0 else result


def hodge_laplacian(g: MetricField, alpha: OneForm) -> OneForm:
    """``dd* + d*d`` on 1-forms."""
    _require_form(alpha, (1,), 'hodge_laplacian')
    return ext_d(codifferential(g, alpha)) + codifferential(g, ext_d(alpha))


def flat(g: MetricField, X: VectorField) -> OneForm:
    return OneForm(lambda p: MetricAt(g, p).flat(X(p)), f'{X.name}_flat')


def sharp(g: MetricField, alpha: OneForm) -> VectorField:
    _require_form(alpha, (1,), 'sharp')
    return VectorField(lambda p: MetricAt(g, p).sharp(alpha(p)), f'{alpha.name}_sharp')


def inner(g: MetricField, X: VectorField, Y: VectorField) -> ScalarField:
    return ScalarField(lambda p: (MetricAt(g, p).inner(X(p), Y(p)),), f'g({X.name},{Y.name})')


def volume_form(g: MetricField) -> ThreeForm:
    return ThreeForm(lambda p: (MetricAt(g, p).vol,), 'vol_g')


def lie_divergence(X: VectorField, volume: ThreeForm) -> ScalarField:
    """Divergence of ``X`` for a volume ``m dx^dy^dt``: ``L_X vol = div * vol``."""
    flux = ext_d(interior(X, volume))
    return ScalarField(lambda p: (flux(p)[0] / volume(p)[0],), f'div_{volume.name}{X.name}')


def pullback_along_map(F: Callable[[Point], Tuple], form: DifferentialForm) -> DifferentialForm:
    """``F^* form`` for a chart map ``F`` evaluated with derivative propagation."""
    def fn(p):
        image = tuple(F(p))
        D = partials(F, p)  # D[j][i] = d_j F^i
        J = tuple(tuple(D[j][i] for j in range(3)) for i in range(3))
        val = form(image)
        if form.degree == 0:
            return val
        if form.degree == 1:
            return tuple(sum(val[i] * J[i][j] for i in range(3)) for j in range(3))
        if form.degree == 2:
            return matvec(adjugate(J), val)
        return (val[0] * det3(J),)
    return form_of_degree(form.degree, fn, f'pullback_{form.name}')


# finite-difference cross-check

def central_difference(fn: Callable[[Point], Tuple], points: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """``result[n, j, c]``: central difference of component ``c`` along coordinate ``j``."""
    points = np.asarray(points, dtype=float)
    n = len(points)
    out = []
    for j in range(3):
        shift = np.zeros(3)
        shift[j] = step
        plus = fn(split_points(points + shift))
        minus = fn(split_points(points - shift))
        out.append(np.stack([(as_array(a, (n,)) - as_array(b, (n,))) / (2 * step)
                             for a, b in zip(plus, minus)], axis=1))
    return np.stack(out, axis=1)


def propagated_partials(fn: Callable[[Point], Tuple], points: np.ndarray) -> np.ndarray:
    """Same layout as :func:`central_difference`, from derivative propagation."""
    n = len(points)
    D = partials(fn, split_points(points))
    return np.stack([np.stack([as_array(c, (n,)) for c in row], axis=1) for row in D], axis=1)


def finite_difference_check(fn: Callable[[Point], Tuple], points: np.ndarray,
                            step: float = FD_STEP) -> Dict[str, float]:
    """Max deviation between propagated and central-difference first derivatives."""
    exact = propagated_partials(fn, points)
    approx = central_difference(fn, points, step)
    return {
        'max_abs_error': float(np.max(np.abs(exact - approx))),
        'max_abs_derivative': float(np.max(np.abs(exact))),
        'step': step,
    }
