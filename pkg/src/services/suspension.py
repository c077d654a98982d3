"""Hamiltonian disk maps, their suspensions, Poincare return maps and gauge changes.

Disk coordinates are centered at the origin. An isotopy is given by its
generator ``H(t, p)``; the disk map ``f`` is the time-one flow of
``X_H = (dH/dy, -dH/dx)``.
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from config.constants import INTEGRATOR_DEFAULTS, QUADRATURE_NODES, SAMPLE_COUNTS, TOLERANCES
from services.calculus.fields import (Chart, CosymplecticPair, OneForm, Point, ScalarField, TwoForm, VectorField,
                                      solid_torus_chart)
from services.calculus.jets import Number, as_array, gradient, hessian, lift_linear, primal, sin
from services.calculus.linalg import add
from services.calculus.operators import d_components, ext_d, wedge
from services.calculus.profiles import falling_cutoff, safe_radius, temporal_bump
from services.calculus.sampling import sample_disk
from utils.errors import (IntegrationFailure, NonClosed, NonCohomologous, TransversalityLoss, ValidationFailure)
from utils.logger import get_enhanced_logger, log_performance

logger = get_enhanced_logger(__name__)

PROFILES = ('rotation', 'shear', 'custom-polynomial', 'zero')


def wrap_time(t: Number) -> Number:
    """Reduce t to [0, 1) keeping derivative information."""
    return t - np.floor(primal(t))


@dataclass(frozen=True)
class HamiltonianIsotopy:
    """Time-periodic generator supported in ``|p| < support_radius`` and ``t`` in ``t_window``."""

    profile: str
    params: Tuple[Tuple[str, object], ...]
    support_radius: float
    t_window: Tuple[float, float]
    generator: Callable[[Number, Number, Number], Number] = field(compare=False, repr=False)
    disk_radius: float = 1.0

    def __post_init__(self):
        t_a, t_b = self.t_window
        if not 0.0 < t_a < t_b < 1.0:
            raise ValidationFailure("Temporal window must lie inside (0, 1)", {'t_window': list(self.t_window)})
        if not 0.0 <= self.support_radius < self.disk_radius:
            raise ValidationFailure("Support radius must be smaller than the disk radius",
                                    {'support_radius': self.support_radius, 'disk_radius': self.disk_radius})

    def H(self, point: Point) -> Number:
        x, y, t = point
        return self.generator(wrap_time(t), x, y)

    def hamiltonian(self) -> ScalarField:
        return ScalarField(lambda p: (self.H(p),), f'H_{self.profile}')

    @property
    def parameters(self) -> Dict[str, object]:
        return dict(self.params)

    def to_dict(self) -> Dict:
        return {
            'profile': self.profile,
            'params': {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.params},
            'support_radius': self.support_radius,
            't_window': list(self.t_window),
            'disk_radius': self.disk_radius,
        }


def _check_radii(inner: float, outer: float):
    if not 0.0 < inner < outer:
        raise ValidationFailure("Cutoff radii must satisfy 0 < r_a < r_H", {'r_a': inner, 'r_H': outer})


def rotation_isotopy(omega: float, r_a: float, r_h: float, t_window=(0.2, 0.8),
                     disk_radius: float = 1.0) -> HamiltonianIsotopy:
    """``H = tau(t) * omega * |p|^2 / 2`` inside ``r_a``; the disk map rotates that disk by ``-omega``."""
    _check_radii(r_a, r_h)
    t_a, t_b = t_window

    def generator(t, x, y):
        r = safe_radius(x, y, 0.5 * r_a)
        return temporal_bump(t, t_a, t_b) * omega * 0.5 * (x * x + y * y) * falling_cutoff(r, r_a, r_h)

    params = (('omega', omega), ('r_a', r_a))
    return HamiltonianIsotopy('rotation', params, r_h, (t_a, t_b), generator, disk_radius)


def shear_isotopy(amplitude: float, r_a: float, r_h: float, t_window=(0.2, 0.8),
                  disk_radius: float = 1.0) -> HamiltonianIsotopy:
    """``H = tau(t) * a * y^2 / 2`` inside ``r_a``: ``x -> x + a y`` while orbits stay there."""
    _check_radii(r_a, r_h)
    t_a, t_b = t_window

    def generator(t, x, y):
        r = safe_radius(x, y, 0.5 * r_a)
        return temporal_bump(t, t_a, t_b) * amplitude * 0.5 * y * y * falling_cutoff(r, r_a, r_h)

    params = (('amplitude', amplitude), ('r_a', r_a))
    return HamiltonianIsotopy('shear', params, r_h, (t_a, t_b), generator, disk_radius)


def polynomial_isotopy(coefficients: Mapping[Tuple[int, int], float], r_a: float, r_h: float,
                       t_window=(0.2, 0.8), disk_radius: float = 1.0) -> HamiltonianIsotopy:
    """``H = tau(t) * chi(|p|) * sum c_ij x^i y^j``."""
    _check_radii(r_a, r_h)
    t_a, t_b = t_window
    terms = tuple(sorted((int(i), int(j), float(c)) for (i, j), c in coefficients.items()))

    def generator(t, x, y):
        r = safe_radius(x, y, 0.5 * r_a)
        poly = 0.0
        for i, j, c in terms:
            poly = poly + c * x ** i * y ** j if (i or j) else poly + c
        return temporal_bump(t, t_a, t_b) * poly * falling_cutoff(r, r_a, r_h)

    params = (('coefficients', tuple((f'{i},{j}', c) for i, j, c in terms)), ('r_a', r_a))
    return HamiltonianIsotopy('custom-polynomial', params, r_h, (t_a, t_b), generator, disk_radius)


def zero_isotopy(disk_radius: float = 1.0) -> HamiltonianIsotopy:
    return HamiltonianIsotopy('zero', (), 0.0, (0.25, 0.75), lambda t, x, y: 0.0 * x, disk_radius)


# planar Hamiltonian dynamics

def ham_vector_field(iso: HamiltonianIsotopy, t: Number, p: Sequence[Number]) -> Tuple[Number, Number]:
    """``X_H = (dH/dy, -dH/dx)``: the field with ``i_{X_H}(dx ^ dy) = d_p H``."""
    Hx, Hy = gradient(lambda q: iso.H((q[0], q[1], t)), (p[0], p[1]))
    return Hy, -Hx


def _planar_velocity(iso: HamiltonianIsotopy, t: float, q: np.ndarray) -> np.ndarray:
    Hy, neg_Hx = ham_vector_field(iso, np.full(1, t), (q[:1], q[1:2]))
    return np.array([as_array(Hy, (1,))[0], as_array(neg_Hx, (1,))[0]])


@dataclass
class DiskMapResult:
    seeds: np.ndarray
    images: np.ndarray
    jacobians: np.ndarray

    @property
    def determinants(self) -> np.ndarray:
        J = self.jacobians
        return J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]

    @property
    def area_defect_max(self) -> float:
        return float(np.max(np.abs(self.determinants - 1.0)))


@log_performance("disk_map")
def disk_map(iso: HamiltonianIsotopy, seeds: np.ndarray, rtol: float = INTEGRATOR_DEFAULTS['rtol'],
             atol: float = INTEGRATOR_DEFAULTS['atol']) -> DiskMapResult:
    """Time-one flow of ``X_H`` at every seed, with its Jacobian from the variational equations."""
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    n = len(seeds)

    def rhs(t, state):
        x, y = state[:n], state[n:2 * n]
        J = state[2 * n:].reshape(4, n)  # J11, J12, J21, J22
        tt = np.full(n, t)
        Hx, Hy = gradient(lambda q: iso.H((q[0], q[1], tt)), (x, y))
        (Hxx, Hxy), (Hyx, Hyy) = hessian(lambda q: iso.H((q[0], q[1], tt)), (x, y))
        a11, a12 = as_array(Hyx, (n,)), as_array(Hyy, (n,))
        a21, a22 = -as_array(Hxx, (n,)), -as_array(Hxy, (n,))
        dJ = np.concatenate([
            a11 * J[0] + a12 * J[2], a11 * J[1] + a12 * J[3],
            a21 * J[0] + a22 * J[2], a21 * J[1] + a22 * J[3],
        ])
        return np.concatenate([as_array(Hy, (n,)), -as_array(Hx, (n,)), dJ])

    J0 = np.concatenate([np.ones(n), np.zeros(n), np.zeros(n), np.ones(n)])
    y0 = np.concatenate([seeds[:, 0], seeds[:, 1], J0])
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method=INTEGRATOR_DEFAULTS['method'], rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationFailure("Disk map integration failed", {'message': sol.message, 'seeds': n})

    final = sol.y[:, -1]
    images = np.column_stack([final[:n], final[n:2 * n]])
    J = final[2 * n:].reshape(4, n)
    jacobians = np.stack([np.stack([J[0], J[1]], axis=1), np.stack([J[2], J[3]], axis=1)], axis=1)
    result = DiskMapResult(seeds, images, jacobians)
    logger.info("Disk map computed", profile=iso.profile, seeds=n, area_defect_max=result.area_defect_max)
    return result


# suspension

@dataclass(frozen=True)
class SuspensionStructure:
    iso: HamiltonianIsotopy
    c: float
    alpha: OneForm
    beta: TwoForm
    reeb: VectorField
    chart: Chart
    validation: Dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def pair(self) -> CosymplecticPair:
        return CosymplecticPair(self.alpha, self.beta, f'suspension_{self.iso.profile}')


def suspension_beta(iso: HamiltonianIsotopy) -> TwoForm:
    """``dx ^ dy + d_p H ^ dt`` in closed form."""
    def fn(p):
        Hy, neg_Hx = ham_vector_field(iso, p[2], (p[0], p[1]))
        return (Hy, neg_Hx, 1.0)
    return TwoForm(fn, 'beta')


def suspension_reeb(iso: HamiltonianIsotopy, c: float) -> VectorField:
    """``(X_H + d_t) / c``."""
    inv_c = 1.0 / c

    def fn(p):
        Hy, neg_Hx = ham_vector_field(iso, p[2], (p[0], p[1]))
        return (inv_c * Hy, inv_c * neg_Hx, inv_c + 0.0 * p[2])
    return VectorField(fn, 'reeb')


def validate_suspension(structure: SuspensionStructure, n_samples: int, seed: int) -> Dict[str, float]:
    iso = structure.iso
    points = sample_disk((0.0, 0.0), iso.disk_radius, n_samples, seed)
    volume = wedge(structure.alpha, structure.beta).at(points)[:, 0]
    report = {
        'sample_count': n_samples,
        'd_beta_max': float(np.max(np.abs(ext_d(structure.beta).at(points)))),
        'volume_min': float(np.min(volume)),
        'volume_defect_max': float(np.max(np.abs(volume - structure.c))),
    }
    if iso.support_radius < iso.disk_radius:
        outer = sample_disk((0.0, 0.0), iso.disk_radius, n_samples, seed + 1, r_min=iso.support_radius)
        flat = np.array([0.0, 0.0, 1.0])
        report['flat_outside_max'] = float(np.max(np.abs(structure.beta.at(outer) - flat)))
    return report


@log_performance("suspend")
def suspend(iso: HamiltonianIsotopy, c: float, n_samples: Optional[int] = None, seed: int = 0) -> SuspensionStructure:
    """Mapping-torus structure ``(c dt, dx ^ dy + d_p H ^ dt)`` and its Reeb field."""
    if not c > 0:
        raise ValidationFailure("Return time c must be positive", {'c': c})
    n_samples = n_samples or SAMPLE_COUNTS['first_order']
    structure = SuspensionStructure(
        iso=iso,
        c=float(c),
        alpha=OneForm(lambda p: (0.0, 0.0, float(c)), 'c_dt'),
        beta=suspension_beta(iso),
        reeb=suspension_reeb(iso, c),
        chart=solid_torus_chart(iso.disk_radius),
    )
    report = validate_suspension(structure, n_samples, seed)
    failures = []
    if report['d_beta_max'] > TOLERANCES['closed']:
        failures.append('d_beta')
    if report['volume_min'] <= 0:
        failures.append('positivity')
    if report.get('flat_outside_max', 0.0) > TOLERANCES['flat_outside']:
        failures.append('flat_outside')
    if failures:
        raise ValidationFailure("Suspension structure failed validation", {'failed': failures, **report})
    return replace(structure, validation=report)


def numerical_pullback_beta(iso: HamiltonianIsotopy, points: np.ndarray, step: float = 1e-5,
                            rtol: float = 1e-11, atol: float = 1e-12) -> np.ndarray:
    """``G^*(dx ^ dy)`` for ``G(p, t) = (flow from t back to 0 of p, t)``, by central differences.

    Cross-check for the closed form of :func:`suspension_beta`.
    """
    def back(x, y, t):
        if t == 0.0:
            return np.array([x, y])
        sol = solve_ivp(lambda s, q: _planar_velocity(iso, s, q), (t, 0.0), [x, y],
                        method=INTEGRATOR_DEFAULTS['method'], rtol=rtol, atol=atol)
        return sol.y[:, -1]

    out = []
    for x, y, t in np.asarray(points, dtype=float):
        J = np.zeros((3, 3))
        for j, e in enumerate(np.eye(3) * step):
            plus = np.append(back(x + e[0], y + e[1], t + e[2]), t + e[2])
            minus = np.append(back(x - e[0], y - e[1], t - e[2]), t - e[2])
            J[:, j] = (plus - minus) / (2 * step)
        adj = np.linalg.det(J) * np.linalg.inv(J)
        out.append(adj @ np.array([0.0, 0.0, 1.0]))
    return np.array(out)


# Poincare return maps

@dataclass(frozen=True)
class SectionSpec:
    """Disk ``{|p - center| <= radius} x {t0}``; a return is one full turn in t."""

    center: Tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0
    t0: float = 0.0
    period: float = 1.0
    margin: float = INTEGRATOR_DEFAULTS['transversality_margin']
    rtol: float = INTEGRATOR_DEFAULTS['rtol']
    atol: float = INTEGRATOR_DEFAULTS['atol']
    max_time: Optional[float] = None


@dataclass
class ReturnResult:
    start: Tuple[float, float]
    point: Tuple[float, float]
    time: float
    evaluations: int


def _single_point_field(field: VectorField):
    def evaluate(state):
        values = field((np.array([state[0]]), np.array([state[1]]), np.array([state[2]])))
        return np.array([float(as_array(v, (1,))[0]) for v in values])
    return evaluate


@log_performance("poincare_return")
def poincare_return(structure, section: SectionSpec, start: Sequence[float],
                    rtol: Optional[float] = None, atol: Optional[float] = None,
                    dense: bool = False):
    """Flow the Reeb field from ``(start, t0)`` until t has advanced by one period."""
    rtol = rtol or section.rtol
    atol = atol or section.atol
    offset = np.hypot(start[0] - section.center[0], start[1] - section.center[1])
    if offset > section.radius:
        raise ValidationFailure("Start point lies outside the section disk",
                                {'start': [float(start[0]), float(start[1])], 'radius': section.radius})
    # flow time for one turn is c * period; give up after max_period_factor turns
    max_time = section.max_time or INTEGRATOR_DEFAULTS['max_period_factor'] * structure.c * section.period
    evaluate = _single_point_field(structure.reeb)

    def rhs(s, state):
        v = evaluate(state)
        if v[2] < section.margin:
            raise TransversalityLoss("Reeb field lost transversality to the section",
                                     {'point': state.tolist(), 'dt_component': float(v[2]), 'margin': section.margin})
        return v

    def crossing(s, state):
        return state[2] - (section.t0 + section.period)
    crossing.terminal = True
    crossing.direction = 1

    y0 = [float(start[0]), float(start[1]), section.t0]
    sol = solve_ivp(rhs, (0.0, max_time), y0, method=INTEGRATOR_DEFAULTS['method'],
                    rtol=rtol, atol=atol, events=crossing, dense_output=dense)
    if sol.status == -1:
        raise IntegrationFailure("Return map integration failed", {'message': sol.message, 'start': list(y0)})
    if len(sol.t_events[0]) == 0:
        raise IntegrationFailure("Trajectory did not return to the section", {'start': list(y0),
                                                                              'max_time': max_time})
    hit = sol.y_events[0][0]
    result = ReturnResult((float(start[0]), float(start[1])), (float(hit[0]), float(hit[1])),
                          float(sol.t_events[0][0]), int(sol.nfev))
    if dense:
        return result, sol
    return result


def return_map(structure, section: SectionSpec, seeds: np.ndarray,
               rtol: Optional[float] = None, atol: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Return points ``(N, 2)`` and return times ``(N,)`` for a batch of seeds."""
    results = [poincare_return(structure, section, s, rtol, atol) for s in np.atleast_2d(seeds)]
    return np.array([r.point for r in results]), np.array([r.time for r in results])


def reeb_trajectory(structure, section: SectionSpec, start: Sequence[float], n_points: int = 200) -> np.ndarray:
    """Rows ``(time, x, y, t)`` along one return of the Reeb flow."""
    result, sol = poincare_return(structure, section, start, dense=True)
    times = np.linspace(0.0, result.time, n_points)
    states = sol.sol(times)
    return np.column_stack([times, states[0], states[1], states[2]])


def convergence_report(structure, section: SectionSpec, seeds: np.ndarray) -> Dict[str, float]:
    """Return points at the section tolerance and at one tenth of it."""
    coarse, _ = return_map(structure, section, seeds)
    fine, _ = return_map(structure, section, seeds, section.rtol / 10, section.atol / 10)
    return {
        'rtol': section.rtol,
        'seed_count': len(np.atleast_2d(seeds)),
        'max_change': float(np.max(np.linalg.norm(coarse - fine, axis=1))),
    }


# gauge normalization

def _gauss_legendre(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def loop_integral(alpha: OneForm, q: np.ndarray, nodes: int = QUADRATURE_NODES) -> np.ndarray:
    """``int_0^1 alpha(d_t) dt`` along the t-circle through each ``q`` of an ``(N, 2)`` array."""
    s, w = _gauss_legendre(nodes)
    q = np.atleast_2d(q)
    X = np.broadcast_to(q[:, 0], (nodes, len(q)))
    Y = np.broadcast_to(q[:, 1], (nodes, len(q)))
    T = np.broadcast_to(s[:, None], (nodes, len(q)))
    a_t = as_array(alpha((X, Y, T))[2], (nodes, len(q)))
    return (w[:, None] * a_t).sum(axis=0)


def gauge_potential(alpha: OneForm, c: float, center: Sequence[float],
                    nodes: int = QUADRATURE_NODES) -> ScalarField:
    """``g`` with ``dg = alpha - c dt``: a ray from the center in ``t = 0``, then the t-line."""
    s, w = _gauss_legendre(nodes)
    s_col, w_col = s[:, None], w[:, None]
    cx, cy = float(center[0]), float(center[1])

    def fn(p):
        x, y, t = p
        dx, dy = x - cx, y - cy
        zero = 0.0 * t
        ray = alpha((cx + s_col * dx, cy + s_col * dy, zero + 0.0 * s_col))
        planar = w_col * (ray[0] * dx + ray[1] * dy)
        ts = s_col * t
        line = alpha((x + 0.0 * s_col, y + 0.0 * s_col, ts))
        vertical = w_col * ((line[2] - c) * t)
        total = lift_linear(lambda a: a.sum(axis=0), planar + vertical)
        return (total,)

    return ScalarField(fn, 'gauge_potential')


@dataclass
class GaugeResult:
    c: float
    potential: ScalarField
    sample_count: int
    residual_max: float
    det_min: float
    loop_error_max: float
    potential_error_max: Optional[float] = None

    def transform(self, point: Point) -> Tuple:
        """``G(q, t) = (q, t + g(q, t) / c)``."""
        g = self.potential(point)[0]
        return (point[0], point[1], point[2] + g / self.c)

    def to_dict(self) -> Dict:
        out = {
            'c': self.c,
            'sample_count': self.sample_count,
            'residual_max': self.residual_max,
            'det_min': self.det_min,
            'loop_error_max': self.loop_error_max,
        }
        if self.potential_error_max is not None:
            out['potential_error_max'] = self.potential_error_max
        return out


@log_performance("gauge_normalize")
def gauge_normalize(alpha: OneForm, c: float, center: Sequence[float], radius: float,
                    n_samples: Optional[int] = None, seed: int = 0,
                    reference: Optional[ScalarField] = None) -> GaugeResult:
    """Potential and residual of the gauge change pulling ``c dt`` back to ``alpha`` on a solid torus."""
    n_samples = n_samples or SAMPLE_COUNTS['first_order']
    points = sample_disk(center, radius, n_samples, seed)

    d_alpha = float(np.max(np.abs(ext_d(alpha).at(points))))
    if d_alpha > TOLERANCES['closed']:
        raise NonClosed("alpha is not closed on the solid torus", {'d_alpha_max': d_alpha})

    loops = loop_integral(alpha, points[:, :2])
    loop_error = float(np.max(np.abs(loops - c)))
    if loop_error > TOLERANCES['cohomology']:
        raise NonCohomologous("alpha is not cohomologous to c dt", {'loop_error_max': loop_error, 'c': c})

    potential = gauge_potential(alpha, c, center)
    dg = ext_d(potential).at(points)
    residual = np.abs(np.array([0.0, 0.0, c]) + dg - alpha.at(points))
    det = 1.0 + dg[:, 2] / c

    error = None
    if reference is not None:
        error = float(np.max(np.abs(potential.at(points) - reference.at(points))))

    result = GaugeResult(float(c), potential, n_samples, float(np.max(residual)), float(np.min(det)),
                         loop_error, error)
    logger.info("Gauge normalized", **result.to_dict())
    return result


def manufactured_alpha(c: float, epsilon: float, center: Sequence[float] = (0.0, 0.0),
                       radius: float = 1.0) -> Tuple[OneForm, ScalarField]:
    """``c dt + d(eps sin(2 pi t) chi(q))`` and its generator ``eps sin(2 pi t) chi``."""
    cx, cy = float(center[0]), float(center[1])
    r_in = 0.5 * radius

    def g_true(p):
        x, y, t = p
        r = safe_radius(x - cx, y - cy, 0.5 * r_in)
        return (epsilon * sin(2 * np.pi * t) * falling_cutoff(r, r_in, radius),)

    generator = ScalarField(g_true, 'manufactured_potential')
    alpha = OneForm(lambda p: add((0.0, 0.0, c), d_components(generator, p)), 'manufactured_alpha')
    return alpha, generator
