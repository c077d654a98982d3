"""Tagged dual numbers for nested forward-mode derivative propagation.

A ``Dual`` is ``real + eps * e_tag`` where ``real`` and ``eps`` are plain
numbers, numpy arrays, or duals of a lower tag. Mixed operations place the
highest tag outermost, so independent perturbations never get confused and
nesting two of them yields exact second derivatives.

Leaves are numpy arrays so a single evaluation covers a whole batch of
sample points.
"""

import itertools
from typing import Any, Callable, Sequence, Tuple

import numpy as np

_tags = itertools.count()


def new_tag() -> int:
    return next(_tags)


def _tag(v) -> int:
    return v.tag if isinstance(v, Dual) else -1


def _parts(v, tag: int):
    if isinstance(v, Dual) and v.tag == tag:
        return v.real, v.eps
    return v, 0.0


def _is_zero(v) -> bool:
    return isinstance(v, (int, float)) and v == 0


class Dual:
    __slots__ = ('real', 'eps', 'tag')
    __array_ufunc__ = None

    def __init__(self, real, eps, tag: int):
        self.real = real
        self.eps = eps
        self.tag = tag

    def __repr__(self):
        return f"Dual({self.real!r}, {self.eps!r}, tag={self.tag})"

    def __add__(self, other):
        tag = max(self.tag, _tag(other))
        ar, ae = _parts(self, tag)
        br, be = _parts(other, tag)
        return Dual(ar + br, ae if _is_zero(be) else (be if _is_zero(ae) else ae + be), tag)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.real, 0.0 if _is_zero(self.eps) else -self.eps, self.tag)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        tag = max(self.tag, _tag(other))
        ar, ae = _parts(self, tag)
        br, be = _parts(other, tag)
        if _is_zero(ae):
            eps = 0.0 if _is_zero(be) else ar * be
        elif _is_zero(be):
            eps = ae * br
        else:
            eps = ar * be + ae * br
        return Dual(ar * br, eps, tag)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return other * reciprocal(self)

    def __pow__(self, n):
        if isinstance(n, Dual):
            return exp(n * log(self))
        if n == 2:
            return self * self
        return Dual(self.real ** n, 0.0 if _is_zero(self.eps) else n * self.real ** (n - 1) * self.eps, self.tag)

    # comparisons act on the primal value and produce boolean masks
    def __lt__(self, other):
        return primal(self) < primal(other)

    def __le__(self, other):
        return primal(self) <= primal(other)

    def __gt__(self, other):
        return primal(self) > primal(other)

    def __ge__(self, other):
        return primal(self) >= primal(other)


Number = Any


def primal(v: Number):
    while isinstance(v, Dual):
        v = v.real
    return v


def reciprocal(v: Number):
    if isinstance(v, Dual):
        inv = reciprocal(v.real)
        return Dual(inv, 0.0 if _is_zero(v.eps) else -v.eps * inv * inv, v.tag)
    return 1.0 / v


def _lift(f: Callable, df: Callable) -> Callable:
    def g(v):
        if isinstance(v, Dual):
            return Dual(g(v.real), 0.0 if _is_zero(v.eps) else v.eps * df(v.real), v.tag)
        return f(v)
    g.__name__ = f.__name__
    return g


sin = _lift(np.sin, lambda r: cos(r))
cos = _lift(np.cos, lambda r: -sin(r))
exp = _lift(np.exp, lambda r: exp(r))
log = _lift(np.log, lambda r: reciprocal(r))
sqrt = _lift(np.sqrt, lambda r: 0.5 * reciprocal(sqrt(r)))
tanh = _lift(np.tanh, lambda r: 1.0 - tanh(r) * tanh(r))


def arctan2(y: Number, x: Number):
    if isinstance(y, Dual) or isinstance(x, Dual):
        tag = max(_tag(y), _tag(x))
        yr, ye = _parts(y, tag)
        xr, xe = _parts(x, tag)
        r2 = xr * xr + yr * yr
        return Dual(arctan2(yr, xr), (xr * ye - yr * xe) / r2, tag)
    return np.arctan2(y, x)


def where(cond, a: Number, b: Number):
    """Branch selection on a primal mask; both branches must be finite."""
    if isinstance(a, Dual) or isinstance(b, Dual):
        tag = max(_tag(a), _tag(b))
        ar, ae = _parts(a, tag)
        br, be = _parts(b, tag)
        eps = 0.0 if (_is_zero(ae) and _is_zero(be)) else where(cond, ae, be)
        return Dual(where(cond, ar, br), eps, tag)
    return np.where(cond, a, b)


def floor_offset(v: Number):
    """``v - round(v)`` with the rounding taken on the primal value."""
    return v - np.round(primal(v))


def lift_linear(fn: Callable[[np.ndarray], np.ndarray], v: Number):
    """Apply a linear array operation (sum, reshape, ...) through every component."""
    if isinstance(v, Dual):
        return Dual(lift_linear(fn, v.real), 0.0 if _is_zero(v.eps) else lift_linear(fn, v.eps), v.tag)
    return fn(np.asarray(v))


def tangent(v: Number, tag: int):
    """Coefficient of ``e_tag`` in ``v``."""
    if isinstance(v, Dual):
        if v.tag == tag:
            return v.eps
        if v.tag > tag:
            re = tangent(v.real, tag)
            ee = tangent(v.eps, tag)
            if _is_zero(ee):
                return re
            return Dual(re, ee, v.tag)
    return 0.0


def perturb(point: Sequence[Number], direction: int, tag: int) -> Tuple:
    """Point with coordinate ``direction`` carrying a unit tangent of ``tag``."""
    return tuple(p + Dual(0.0, 1.0, tag) if i == direction else p for i, p in enumerate(point))


def partials(fn: Callable[[Tuple], Sequence[Number]], point: Sequence[Number]) -> Tuple[Tuple, ...]:
    """``result[j][c]`` is the derivative of component ``c`` of ``fn`` along coordinate ``j``."""
    out = []
    for j in range(len(point)):
        tag = new_tag()
        values = fn(perturb(point, j, tag))
        out.append(tuple(tangent(c, tag) for c in values))
    return tuple(out)


def directional(fn: Callable[[Tuple], Sequence[Number]], point: Sequence[Number],
                direction: Sequence[Number]) -> Tuple:
    """Derivative of every component of ``fn`` along a (pointwise) vector."""
    tag = new_tag()
    moved = tuple(p + Dual(0.0, d, tag) for p, d in zip(point, direction))
    return tuple(tangent(c, tag) for c in fn(moved))


def gradient(fn: Callable[[Tuple], Number], point: Sequence[Number]) -> Tuple:
    return tuple(row[0] for row in partials(lambda p: (fn(p),), point))


def hessian(fn: Callable[[Tuple], Number], point: Sequence[Number]) -> Tuple[Tuple, ...]:
    """Nested propagation: ``H[i][j] = d_i d_j fn``."""
    return tuple(
        tuple(row[0] for row in partials(lambda p, i=i: (gradient(fn, p)[i],), point))
        for i in range(len(point))
    )


def as_array(v: Number, shape=None) -> np.ndarray:
    """Primal value as a float array, broadcast to ``shape`` when given."""
    a = np.asarray(primal(v), dtype=float)
    if shape is not None:
        a = np.broadcast_to(a, shape)
    return a
