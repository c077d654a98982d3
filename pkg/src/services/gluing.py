"""Deformation of the flat 3-torus that plants a Hamiltonian disk map as a return map.

The ambient manifold is the unit flat torus with coordinates ``(x, y, t)``,
``alpha = c dt`` and ``beta = dx ^ dy``. A solid torus ``T`` around the circle
``center x S^1`` is deformed so that, inside the smaller torus ``T0``, the
structure is the suspension of the isotopy placed at scale ``s``.
Every polar quantity is written in Cartesian form with periodic offsets
``(x - x0, y - y0)`` reduced to ``[-1/2, 1/2)``.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.constants import DEFAULT_RADII, DEFAULT_VISCOSITIES, SAMPLE_COUNTS, TOLERANCES
from monitoring.checks import CheckContext, VerificationRunner
from services.calculus.cosymplectic import metric_from_pair, reeb_field
from services.calculus.fields import (FLAT_TORUS, Chart, CosymplecticPair, MetricField, OneForm, Point,
                                      ScalarField, TwoForm, VectorField, constant_form, constant_vector,
                                      diagonal_metric)
from services.calculus.jets import Number, as_array, floor_offset
from services.calculus.navier_stokes import pressure
from services.calculus.operators import d_components, ext_d, hodge_star, sharp, wedge
from services.calculus.profiles import rising_cutoff, safe_radius, smooth_step_derivative
from services.calculus.sampling import periodic_radius, sample_disk, sample_outside
from services.suspension import HamiltonianIsotopy, SectionSpec
from utils.errors import BadRadii, PositivityFailure, SupportViolation, ValidationFailure
from utils.logger import get_enhanced_logger, log_performance

logger = get_enhanced_logger(__name__)


@dataclass(frozen=True)
class AmbientTorus:
    """Flat torus with the harmonic 1-form ``c dt``; the metric is ``diag(1, 1, c^2)``."""

    c: float = 1.0
    chart: Chart = FLAT_TORUS

    def __post_init__(self):
        if not self.c > 0:
            raise ValidationFailure("Return time c must be positive", {'c': self.c})

    @property
    def alpha(self) -> OneForm:
        return constant_form(1, (0.0, 0.0, self.c), 'c_dt')

    @property
    def beta(self) -> TwoForm:
        return constant_form(2, (0.0, 0.0, 1.0), 'dx^dy')

    @property
    def metric(self) -> MetricField:
        return diagonal_metric((1.0, 1.0, self.c * self.c), 'ambient')

    @property
    def X(self) -> VectorField:
        return constant_vector((0.0, 0.0, 1.0 / self.c), 'ambient_X')

    @property
    def pressure_value(self) -> float:
        return -0.5


@dataclass(frozen=True)
class NestedTori:
    """``T0 subset T subset T1`` around ``center x S^1`` and the section disk ``D0``."""

    r0: float = DEFAULT_RADII['r0']
    rT: float = DEFAULT_RADII['rT']
    r1: float = DEFAULT_RADII['r1']
    rD0: float = DEFAULT_RADII['rD0']
    center: Tuple[float, float] = DEFAULT_RADII['center']

    def __post_init__(self):
        if not 0.0 < self.rD0 <= self.r0 < self.rT < self.r1 < 0.5:
            raise BadRadii("Radii must satisfy 0 < rD0 <= r0 < rT < r1 < 1/2", self.to_dict())
        object.__setattr__(self, 'center', (float(self.center[0]), float(self.center[1])))

    def offsets(self, point: Point) -> Tuple[Number, Number]:
        return floor_offset(point[0] - self.center[0]), floor_offset(point[1] - self.center[1])

    def radius(self, point: Point) -> Number:
        dx, dy = self.offsets(point)
        return safe_radius(dx, dy, 0.5 * self.r0)

    def radii_of(self, points: np.ndarray) -> np.ndarray:
        return periodic_radius(np.asarray(points, dtype=float), self.center)

    def to_dict(self) -> Dict:
        return {'r0': self.r0, 'rT': self.rT, 'r1': self.r1, 'rD0': self.rD0, 'center': list(self.center)}


def cutoff_rho(r: Number, r0: float, rT: float) -> Number:
    """0 on ``r <= r0``, 1 on ``r >= rT``, the smooth step in between."""
    if not r0 < rT:
        raise BadRadii("Cutoff requires r0 < rT", {'r0': r0, 'rT': rT})
    return rising_cutoff(r, r0, rT)


def cutoff_rho_derivative(r: Number, r0: float, rT: float) -> Number:
    width = rT - r0
    return smooth_step_derivative((r - r0) / width) / width


def primitive_eta(tori: NestedTori) -> OneForm:
    """``eta = r^2/2 dtheta = (x dy - y dx) / 2`` in offsets about the center circle."""
    def fn(p):
        dx, dy = tori.offsets(p)
        return (-0.5 * dy, 0.5 * dx, 0.0 * dx)
    return OneForm(fn, 'eta')


def eta_theta(tori: NestedTori, r: Number) -> Number:
    return 0.5 * r * r


def k_constant(tori: NestedTori, n_samples: int = 2001) -> float:
    """Minimum of ``eta_theta`` over ``r0 <= r <= r1``, by evaluation on a radial grid."""
    radii = np.linspace(tori.r0, tori.r1, n_samples)
    points = np.column_stack([tori.center[0] + radii, np.full_like(radii, tori.center[1]), np.zeros_like(radii)])
    eta = primitive_eta(tori).at(points)
    # on the ray theta = 0, eta(d_theta) = r * eta_y
    k = float(np.min(radii * eta[:, 1]))
    closed_form = 0.5 * tori.r0 ** 2
    if abs(k - closed_form) > TOLERANCES['structural']:
        raise ValidationFailure("k disagrees with r0^2 / 2", {'k': k, 'closed_form': closed_form})
    return k


def cutoff_primitive(tori: NestedTori, k: float) -> OneForm:
    """``rho (eta - k dtheta) = rho (1/2 - k/r^2) (-y dx + x dy)``; zero inside ``T0``."""
    def fn(p):
        dx, dy = tori.offsets(p)
        r = tori.radius(p)
        factor = cutoff_rho(r, tori.r0, tori.rT) * (0.5 - k / (r * r))
        return (-factor * dy, factor * dx, 0.0 * factor)
    return OneForm(fn, 'rho_eta_k')


def section_scale(iso: HamiltonianIsotopy, tori: NestedTori) -> float:
    """Scale ``s`` placing the isotopy disk onto ``D0``."""
    return tori.rD0 / iso.disk_radius


def placed_generator(iso: HamiltonianIsotopy, tori: NestedTori, scale: Optional[float] = None) -> ScalarField:
    """``K(t, q) = s^2 H(t, (q - q0) / s)``; its Hamiltonian flow is the isotopy conjugated by the scaling."""
    s = section_scale(iso, tori) if scale is None else float(scale)

    def fn(p):
        dx, dy = tori.offsets(p)
        return (s * s * iso.H((dx / s, dy / s, p[2])),)
    return ScalarField(fn, f'K_{iso.profile}')


def beta_prime(iso: HamiltonianIsotopy, tori: NestedTori, scale: Optional[float] = None,
               n_samples: Optional[int] = None, seed: int = 0) -> TwoForm:
    """``(1 - rho) dx ^ dy + dK ^ dt``: the suspension form in ``T0``, zero outside ``T``."""
    s = section_scale(iso, tori) if scale is None else float(scale)
    if s * iso.support_radius > tori.rD0:
        raise SupportViolation("Isotopy support exceeds the section disk", {
            'scaled_support': s * iso.support_radius, 'rD0': tori.rD0})

    K = placed_generator(iso, tori, s)

    def fn(p):
        r = tori.radius(p)
        Kx, Ky, _ = d_components(K, p)
        return (Ky, -Kx, 1.0 - cutoff_rho(r, tori.r0, tori.rT))

    form = TwoForm(fn, 'beta_prime')

    # the placed generator must vanish on the annulus between D0 and T
    n_samples = n_samples or SAMPLE_COUNTS['outside']
    annulus = sample_disk(tori.center, tori.rT, n_samples, seed, r_min=tori.rD0)
    leak = float(np.max(np.abs(ext_d(K).at(annulus))))
    if leak > TOLERANCES['flat_outside']:
        raise SupportViolation("Placed generator is not supported in D0", {'dK_max_outside_D0': leak})
    return form


def positivity_decomposition(tori: NestedTori, k: float, points: np.ndarray) -> Dict[str, float]:
    """Minima of the three terms of the ``dx ^ dy`` coefficient on ``T \\ T0``.

    ``rho' (eta_theta - k) / r`` is non-negative, ``rho`` vanishes only on ``T0``
    and ``1 - rho`` only outside ``T``, so the sum is at least 1.
    """
    r = tori.radii_of(points)
    mask = (r >= tori.r0) & (r <= tori.rT)
    r = r[mask]
    if not len(r):
        return {'sample_count': 0}
    rho = as_array(cutoff_rho(r, tori.r0, tori.rT))
    collar = as_array(cutoff_rho_derivative(r, tori.r0, tori.rT)) * (eta_theta(tori, r) - k) / r
    return {
        'sample_count': int(len(r)),
        'collar_term_min': float(np.min(collar)),
        'rho_term_min': float(np.min(rho)),
        'complement_term_min': float(np.min(1.0 - rho)),
        'sum_min': float(np.min(collar + rho + (1.0 - rho))),
    }


def closed_form_beta_xy(tori: NestedTori, k: float, points: np.ndarray) -> np.ndarray:
    """``1 + rho'(r) (r^2/2 - k) / r``: the ``dx ^ dy`` coefficient of the deformed form when K = 0."""
    r = np.maximum(tori.radii_of(points), 0.5 * tori.r0)
    return 1.0 + as_array(cutoff_rho_derivative(r, tori.r0, tori.rT)) * (0.5 * r * r - k) / r


@log_performance("build_tilde_beta")
def build_tilde_beta(iso: HamiltonianIsotopy, tori: NestedTori, c: float,
                     n_samples: Optional[int] = None, seed: int = 0) -> Tuple[TwoForm, Dict[str, float]]:
    """``d(rho (eta - k dtheta)) + beta'`` with its positivity validated at samples."""
    k = k_constant(tori)
    primitive = cutoff_primitive(tori, k)
    tilde = ext_d(primitive) + beta_prime(iso, tori, seed=seed)
    tilde = TwoForm(tilde.fn, 'beta_tilde')

    n_samples = n_samples or SAMPLE_COUNTS['positivity']
    points = sample_disk(tori.center, tori.r1, n_samples, seed)
    alpha = constant_form(1, (0.0, 0.0, c), 'c_dt')
    volume = wedge(alpha, tilde).at(points)[:, 0]
    report = {'k': k, 'sample_count': n_samples, 'volume_min': float(np.min(volume))}
    report['decomposition'] = positivity_decomposition(tori, k, points)
    if report['volume_min'] <= 0:
        worst = int(np.argmin(volume))
        raise PositivityFailure("alpha ^ beta_tilde is not positive", {
            'point': points[worst].tolist(), 'value': float(volume[worst]), **tori.to_dict()})
    logger.debug("Deformed 2-form built", **{k_: v for k_, v in report.items() if k_ != 'decomposition'})
    return tilde, report


def extend_metric(alpha: OneForm, beta_tilde: TwoForm, tori: NestedTori, c: float,
                  n_samples: Optional[int] = None, seed: int = 0) -> MetricField:
    """Metric with ``*alpha = beta_tilde``; equal to the ambient metric outside ``T``."""
    g = metric_from_pair(CosymplecticPair(alpha, beta_tilde, 'glued'))
    n_samples = n_samples or SAMPLE_COUNTS['outside']

    inside = sample_disk(tori.center, tori.r1, n_samples, seed)
    star_defect = float(np.max(np.abs(hodge_star(g, alpha).at(inside) - beta_tilde.at(inside))))
    outside = sample_outside(tori.center, tori.rT, n_samples, seed + 1)
    flat = np.diag([1.0, 1.0, c * c])
    flat_defect = float(np.max(np.abs(g.at(outside) - flat)))
    if star_defect > TOLERANCES['structural'] or flat_defect > TOLERANCES['flat_outside']:
        raise ValidationFailure("Extended metric does not reproduce the pair", {
            'star_alpha_minus_beta_max': star_defect, 'flat_outside_max': flat_defect})
    return g


@dataclass(frozen=True)
class GluedStructure:
    iso: HamiltonianIsotopy
    tori: NestedTori
    ambient: AmbientTorus
    alpha: OneForm
    beta_tilde: TwoForm
    g_tilde: MetricField
    X_tilde: VectorField
    reeb: VectorField
    pressure: ScalarField
    k: float
    construction: Dict = field(default_factory=dict, compare=False)

    @property
    def c(self) -> float:
        return self.ambient.c

    @property
    def pair(self) -> CosymplecticPair:
        return CosymplecticPair(self.alpha, self.beta_tilde, 'glued')

    @property
    def unit_reeb(self) -> VectorField:
        """Reeb field; unit length for ``g_tilde`` and equal to ``X_tilde``."""
        return self.reeb

    @property
    def scale(self) -> float:
        return section_scale(self.iso, self.tori)

    def section(self, **overrides) -> SectionSpec:
        return SectionSpec(center=self.tori.center, radius=self.tori.rD0, t0=0.0, **overrides)

    def to_section(self, disk_points: np.ndarray) -> np.ndarray:
        return np.asarray(self.tori.center) + self.scale * np.atleast_2d(disk_points)

    def from_section(self, section_points: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(section_points) - np.asarray(self.tori.center)) / self.scale

    def provenance(self) -> Dict:
        return {
            'isotopy': self.iso.to_dict(),
            'radii': self.tori.to_dict(),
            'c': self.c,
            'k': self.k,
            'scale': self.scale,
        }


@log_performance("glue")
def glue(iso: HamiltonianIsotopy, tori: NestedTori, c: float = 1.0,
         n_samples: Optional[int] = None, seed: int = 0) -> GluedStructure:
    """Assemble ``alpha``, ``beta_tilde``, ``g_tilde``, ``X_tilde`` and the pressure."""
    ambient = AmbientTorus(c)
    alpha = ambient.alpha
    beta_tilde, construction = build_tilde_beta(iso, tori, c, n_samples, seed)
    g = extend_metric(alpha, beta_tilde, tori, c, seed=seed)
    X = sharp(g, alpha)
    X = VectorField(X.fn, 'X_tilde')
    structure = GluedStructure(
        iso=iso,
        tori=tori,
        ambient=ambient,
        alpha=alpha,
        beta_tilde=beta_tilde,
        g_tilde=g,
        X_tilde=X,
        reeb=reeb_field(CosymplecticPair(alpha, beta_tilde, 'glued')),
        pressure=pressure(g, X),
        k=construction['k'],
        construction=construction,
    )
    logger.info("Structure glued", profile=iso.profile, c=c, k=structure.k)
    return structure


@log_performance("build")
def build_turing_flow(iso: HamiltonianIsotopy, tori: NestedTori, c: float = 1.0,
                      nu_list: Sequence[float] = DEFAULT_VISCOSITIES, context=None):
    """Glue the structure and run every verification check on it.

    Returns ``(structure, report)``; failed checks are recorded in the report.
    """
    context = context or CheckContext()
    structure = glue(iso, tori, c, context.positivity_samples, context.seed)
    runner = VerificationRunner(structure, context)
    report = runner.build_report(nu_list)
    report['structure'] = structure.provenance()
    report['construction'] = structure.construction
    return structure, report


def field_grid(target, t: float, tori: NestedTori, resolution: int = 41,
               half_width: Optional[float] = None) -> pd.DataFrame:
    """Coefficients of a field on an x-y grid at fixed ``t`` around the center circle."""
    half_width = half_width or tori.r1
    xs = np.linspace(tori.center[0] - half_width, tori.center[0] + half_width, resolution)
    ys = np.linspace(tori.center[1] - half_width, tori.center[1] + half_width, resolution)
    X, Y = np.meshgrid(xs, ys, indexing='ij')
    points = np.column_stack([X.ravel(), Y.ravel(), np.full(X.size, t)])
    values = target.at(points)
    if values.ndim == 3:
        values = values.reshape(len(points), -1)
    frame = pd.DataFrame({'x': points[:, 0], 'y': points[:, 1], 't': points[:, 2]})
    for j in range(values.shape[1]):
        frame[f'c{j}'] = values[:, j]
    return frame
