"""Coordinate charts and coefficient fields on them.

Every field is a function from a point ``(x, y, t)`` to a tuple of
coefficients. Coordinates may be floats, numpy arrays or duals, so the same
field serves plain evaluation over a batch of samples and derivative
propagation.

Bases, with orientation ``dx ^ dy ^ dt > 0``:

* 1-forms and vectors: ``(dx, dy, dt)`` and ``(d_x, d_y, d_t)``
* 2-forms: ``(dy ^ dt, dt ^ dx, dx ^ dy)``
* 3-forms: ``dx ^ dy ^ dt``
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from services.calculus.jets import Number, as_array

Point = Tuple[Number, Number, Number]
COORDINATES = ('x', 'y', 't')
FORM_SIZES = {0: 1, 1: 3, 2: 3, 3: 1}


@dataclass(frozen=True)
class Chart:
    """Three-dimensional coordinate chart with optional periodic coordinates."""

    bounds: Tuple[Tuple[float, float], ...] = ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))
    periods: Tuple[Optional[float], ...] = (1.0, 1.0, 1.0)
    names: Tuple[str, ...] = COORDINATES

    def __post_init__(self):
        if len(self.bounds) != 3 or len(self.periods) != 3:
            raise ValueError("Charts are three-dimensional")
        for (lo, hi), period in zip(self.bounds, self.periods):
            if not hi > lo:
                raise ValueError(f"Inconsistent bounds ({lo}, {hi})")
            if period is not None and period <= 0:
                raise ValueError(f"Period must be positive, got {period}")

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])


FLAT_TORUS = Chart()


def solid_torus_chart(radius: float) -> Chart:
    """Square around a disk of the given radius times the periodic circle."""
    return Chart(((-radius, radius), (-radius, radius), (0.0, 1.0)), (None, None, 1.0))


def split_points(points: np.ndarray) -> Point:
    """``(N, 3)`` array to a coordinate tuple of ``(N,)`` arrays."""
    points = np.asarray(points, dtype=float)
    return points[:, 0], points[:, 1], points[:, 2]


class Field:
    """Base class: ``fn(point) -> tuple`` of ``size`` coefficients."""

    size = 3
    kind = 'field'

    def __init__(self, fn: Callable[[Point], Sequence[Number]], name: str = ''):
        self.fn = fn
        self.name = name or self.kind

    def __call__(self, point: Point) -> Tuple:
        return tuple(self.fn(point))

    def at(self, points: np.ndarray) -> np.ndarray:
        """Primal coefficients at an ``(N, 3)`` batch, shape ``(N, size)``."""
        pt = split_points(points)
        n = len(pt[0])
        return np.stack([as_array(c, (n,)) for c in self(pt)], axis=1)

    def _same(self, fn, name):
        return type(self)(fn, name)

    def __add__(self, other: 'Field') -> 'Field':
        self._check_compatible(other)
        return self._same(lambda p: tuple(a + b for a, b in zip(self(p), other(p))),
                          f'({self.name} + {other.name})')

    def __sub__(self, other: 'Field') -> 'Field':
        self._check_compatible(other)
        return self._same(lambda p: tuple(a - b for a, b in zip(self(p), other(p))),
                          f'({self.name} - {other.name})')

    def __neg__(self) -> 'Field':
        return self._same(lambda p: tuple(-a for a in self(p)), f'-{self.name}')

    def scaled(self, factor) -> 'Field':
        """Multiply by a constant or by a scalar field."""
        if isinstance(factor, ScalarField):
            return self._same(lambda p: tuple(factor(p)[0] * a for a in self(p)),
                              f'{factor.name}*{self.name}')
        return self._same(lambda p: tuple(factor * a for a in self(p)), f'{factor}*{self.name}')

    def _check_compatible(self, other: 'Field'):
        if type(self) is not type(other):
            raise TypeError(f"Cannot combine {type(self).__name__} with {type(other).__name__}")


class DifferentialForm(Field):
    degree = -1
    kind = 'form'


class ScalarField(DifferentialForm):
    degree = 0
    size = 1
    kind = 'scalar'


class OneForm(DifferentialForm):
    degree = 1
    kind = 'one_form'


class TwoForm(DifferentialForm):
    degree = 2
    kind = 'two_form'


class ThreeForm(DifferentialForm):
    degree = 3
    size = 1
    kind = 'three_form'


class VectorField(Field):
    kind = 'vector'


FORM_TYPES = {0: ScalarField, 1: OneForm, 2: TwoForm, 3: ThreeForm}


def form_of_degree(degree: int, fn: Callable[[Point], Sequence[Number]], name: str = '') -> DifferentialForm:
    return FORM_TYPES[degree](fn, name)


class MetricField:
    """Symmetric positive-definite 3x3 coefficient matrix ``g_ij``."""

    kind = 'metric'

    def __init__(self, fn: Callable[[Point], Sequence[Sequence[Number]]], name: str = 'g'):
        self.fn = fn
        self.name = name

    def __call__(self, point: Point) -> Tuple[Tuple, ...]:
        return tuple(tuple(row) for row in self.fn(point))

    def at(self, points: np.ndarray) -> np.ndarray:
        """Primal matrices, shape ``(N, 3, 3)``."""
        pt = split_points(points)
        n = len(pt[0])
        g = self(pt)
        return np.stack([np.stack([as_array(g[i][j], (n,)) for j in range(3)], axis=1)
                         for i in range(3)], axis=1)


def constant_form(degree: int, values: Sequence[float], name: str = '') -> DifferentialForm:
    values = tuple(float(v) for v in values)
    if len(values) != FORM_SIZES[degree]:
        raise ValueError(f"A {degree}-form has {FORM_SIZES[degree]} coefficients")
    return form_of_degree(degree, lambda p: values, name or f'const{degree}')


def constant_vector(values: Sequence[float], name: str = '') -> VectorField:
    values = tuple(float(v) for v in values)
    return VectorField(lambda p: values, name or 'const_vector')


def coordinate(i: int) -> ScalarField:
    return ScalarField(lambda p: (p[i],), COORDINATES[i])


def diagonal_metric(values: Sequence[float] = (1.0, 1.0, 1.0), name: str = 'flat') -> MetricField:
    a, b, c = (float(v) for v in values)
    return MetricField(lambda p: ((a, 0.0, 0.0), (0.0, b, 0.0), (0.0, 0.0, c)), name)


FLAT_METRIC = diagonal_metric()


@dataclass(frozen=True)
class CosymplecticPair:
    """Closed 1-form and closed 2-form whose wedge is a volume form."""

    alpha: OneForm
    omega: TwoForm
    label: str = field(default='pair')
