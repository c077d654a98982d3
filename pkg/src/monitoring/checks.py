"""
Named verification checks for glued structures.
"""

import time
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from config.constants import CERTIFIES, DEFAULT_VISCOSITIES, SAMPLE_COUNTS, TOLERANCES
from config.settings import SamplingConfig
from services.calculus.cosymplectic import metric_pair_residuals, pair_residuals
from services.calculus.fields import FLAT_TORUS
from services.calculus.navier_stokes import NavierStokesTerms, symmetry_check
from services.calculus.operators import codifferential, ext_d, lie_divergence, volume_form, wedge
from services.calculus.sampling import sample_chart, sample_disk, sample_disk_seeds, sample_outside
from services.suspension import disk_map, gauge_normalize, return_map
from utils.errors import TuringFlowError
from utils.logger import get_enhanced_logger
from utils.performance_monitor import get_performance_monitor

logger = get_enhanced_logger(__name__)

CHECK_NAMES = ('cosymplectic', 'deformation', 'metric', 'harmonicity', 'ns', 'symmetry',
               'return-map', 'locality', 'area', 'gauge')

# checks run by a build, in report order
BUILD_CHECKS = ('cosymplectic', 'deformation', 'metric', 'harmonicity', 'ns', 'symmetry',
                'return-map', 'locality', 'area')


@dataclass
class CheckResult:
    """Outcome of one named check."""
    name: str
    sample_count: int
    max_residual: Optional[float]
    tolerance: Optional[float]
    passed: bool
    certifies: str
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class CheckContext:
    """Sample counts, seed and tolerance overrides for a verification run."""
    seed: int = 0
    first_order_samples: int = SAMPLE_COUNTS['first_order']
    second_order_samples: int = SAMPLE_COUNTS['second_order']
    positivity_samples: int = SAMPLE_COUNTS['positivity']
    outside_samples: int = SAMPLE_COUNTS['outside']
    seeds: int = SAMPLE_COUNTS['seeds']
    tolerance: Optional[float] = None
    rtol: Optional[float] = None
    atol: Optional[float] = None

    @classmethod
    def from_settings(cls, sampling: SamplingConfig, **overrides) -> 'CheckContext':
        context = cls(
            seed=sampling.seed,
            first_order_samples=sampling.first_order_samples,
            second_order_samples=sampling.second_order_samples,
            seeds=sampling.seeds,
            rtol=sampling.rtol,
            atol=sampling.atol,
        )
        return replace(context, **{k: v for k, v in overrides.items() if v is not None})

    def tol(self, key: str) -> float:
        return self.tolerance if self.tolerance is not None else TOLERANCES[key]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def structure_points(tori, n: int, seed: int) -> np.ndarray:
    """Half the samples over the whole torus, half inside ``T1``."""
    inside = n // 2
    return np.vstack([
        sample_chart(FLAT_TORUS, n - inside, seed),
        sample_disk(tori.center, tori.r1, inside, seed + 1),
    ])


def _result(name: str, sample_count: int, residual: float, tolerance: float, /, passed: Optional[bool] = None,
            **details) -> CheckResult:
    if passed is None:
        passed = bool(residual <= tolerance)
    result = CheckResult(name, int(sample_count), float(residual), float(tolerance), bool(passed),
                         CERTIFIES[name.split('[')[0]], details)
    logger.check_event(result.name, result.passed, result.max_residual, result.tolerance)
    return result


class VerificationRunner:
    """Runs named checks against one glued structure."""

    def __init__(self, structure, context: Optional[CheckContext] = None):
        self.structure = structure
        self.context = context or CheckContext()
        self.performance_monitor = get_performance_monitor()
        self._points: Dict[str, np.ndarray] = {}

    # sample sets are shared between checks of one run
    def points(self, kind: str) -> np.ndarray:
        if kind not in self._points:
            ctx, tori = self.context, self.structure.tori
            if kind == 'first_order':
                pts = structure_points(tori, ctx.first_order_samples, ctx.seed)
            elif kind == 'second_order':
                pts = structure_points(tori, ctx.second_order_samples, ctx.seed + 10)
            elif kind == 'positivity':
                pts = structure_points(tori, ctx.positivity_samples, ctx.seed + 20)
            elif kind == 'outside':
                pts = sample_outside(tori.center, tori.rT, ctx.outside_samples, ctx.seed + 30)
            else:
                raise KeyError(kind)
            self._points[kind] = pts
        return self._points[kind]

    def check_cosymplectic(self) -> CheckResult:
        pts = self.points('first_order')
        report = pair_residuals(self.structure.pair, pts)
        residual = max(report['d_alpha_max'], report['d_omega_max'])
        tol = self.context.tol('closed')
        return _result('cosymplectic', len(pts), residual, tol,
                       passed=residual <= tol and report['volume_min'] > 0, **report)

    def check_deformation(self) -> CheckResult:
        s = self.structure
        pts = self.points('first_order')
        d_beta = float(np.max(np.abs(ext_d(s.beta_tilde).at(pts))))
        outside = self.points('outside')
        flat_defect = float(np.max(np.abs(s.beta_tilde.at(outside) - np.array([0.0, 0.0, 1.0]))))
        positivity = self.points('positivity')
        volume_min = float(np.min(wedge(s.alpha, s.beta_tilde).at(positivity)[:, 0]))
        closed_tol = self.context.tol('closed')
        flat_tol = self.context.tol('flat_outside')
        passed = d_beta <= closed_tol and flat_defect <= flat_tol and volume_min > 0
        return _result('deformation', len(pts), max(d_beta, flat_defect), closed_tol, passed=passed,
                       d_beta_max=d_beta, flat_outside_max=flat_defect, flat_tolerance=flat_tol,
                       volume_min=volume_min, positivity_samples=len(positivity),
                       decomposition=s.construction.get('decomposition', {}))

    def check_metric(self) -> CheckResult:
        s = self.structure
        pts = self.points('first_order')
        report = metric_pair_residuals(s.pair, s.g_tilde, pts)
        outside = self.points('outside')
        flat_defect = float(np.max(np.abs(s.g_tilde.at(outside) - s.ambient.metric.at(outside))))
        field_defect = float(np.max(np.abs(s.X_tilde.at(pts) - s.unit_reeb.at(pts))))
        tol = self.context.tol('structural')
        flat_tol = self.context.tol('flat_outside')
        residual = report['star_alpha_minus_omega_max']
        passed = residual <= tol and flat_defect <= flat_tol and field_defect <= tol
        return _result('metric', len(pts), residual, tol, passed=passed,
                       flat_outside_max=flat_defect, field_minus_unit_reeb_max=field_defect, **report)

    def check_harmonicity(self) -> CheckResult:
        s = self.structure
        pts = self.points('first_order')
        d_alpha = float(np.max(np.abs(ext_d(s.alpha).at(pts))))
        d_star = float(np.max(np.abs(codifferential(s.g_tilde, s.alpha).at(pts))))
        tol = self.context.tol('first_derivative')
        return _result('harmonicity', len(pts), max(d_alpha, d_star), tol,
                       d_alpha_max=d_alpha, d_star_alpha_max=d_star)

    def check_ns(self, nu_list: Sequence[float] = DEFAULT_VISCOSITIES) -> List[CheckResult]:
        s = self.structure
        pts = self.points('second_order')
        with self.performance_monitor.track('ns_terms', samples=len(pts)):
            terms = NavierStokesTerms(s.X_tilde, s.g_tilde, pts)
        results = []
        momentum_tol = self.context.tol('momentum')
        divergence_tol = self.context.tol('divergence')
        for nu in nu_list:
            report = terms.report(nu)
            passed = (report.momentum_residual_max <= momentum_tol
                      and report.divergence_max <= divergence_tol)
            results.append(_result(f'ns[nu={nu:g}]', report.sample_count, report.momentum_residual_max,
                                   momentum_tol, passed=passed, divergence_tolerance=divergence_tol,
                                   **report.to_dict()))
        return results

    def check_symmetry(self) -> CheckResult:
        s = self.structure
        pts = self.points('second_order')
        report = symmetry_check(s.X_tilde, s.g_tilde, pts, self.context.seed)
        return _result('symmetry', len(pts), report['max_defect'], self.context.tol('symmetry'), **report)

    def _seeds(self) -> np.ndarray:
        iso = self.structure.iso
        return sample_disk_seeds((0.0, 0.0), iso.disk_radius, self.context.seeds, self.context.seed)

    def check_return_map(self) -> CheckResult:
        s = self.structure
        seeds = self._seeds()
        overrides = self._integrator_overrides()
        images = disk_map(s.iso, seeds, **overrides).images
        section = s.section(**overrides)
        with self.performance_monitor.track('return_map', seeds=len(seeds)):
            hits, times = return_map(s, section, s.to_section(seeds))
        error = float(np.max(np.linalg.norm(s.from_section(hits) - images, axis=1)))
        time_error = float(np.max(np.abs(times - s.c)))
        tol = self.context.tol('return_map')
        time_tol = self.context.tol('return_time')
        return _result('return-map', len(seeds), error, tol, passed=error <= tol and time_error <= time_tol,
                       return_time_error_max=time_error, time_tolerance=time_tol, scale=s.scale)

    def _integrator_overrides(self) -> Dict[str, float]:
        return {k: v for k, v in (('rtol', self.context.rtol), ('atol', self.context.atol)) if v is not None}

    def check_locality(self) -> CheckResult:
        s = self.structure
        pts = self.points('outside')
        amb = s.ambient
        defects = {
            'metric_max': float(np.max(np.abs(s.g_tilde.at(pts) - amb.metric.at(pts)))),
            'beta_max': float(np.max(np.abs(s.beta_tilde.at(pts) - amb.beta.at(pts)))),
            'X_max': float(np.max(np.abs(s.X_tilde.at(pts) - amb.X.at(pts)))),
            'pressure_max': float(np.max(np.abs(s.pressure.at(pts)[:, 0] - amb.pressure_value))),
        }
        return _result('locality', len(pts), max(defects.values()), self.context.tol('flat_outside'), **defects)

    def check_area(self) -> CheckResult:
        s = self.structure
        seeds = self._seeds()
        result = disk_map(s.iso, seeds, **self._integrator_overrides())
        # the Reeb field preserves alpha ^ beta_tilde
        pts = self.points('second_order')
        volume = volume_form(s.g_tilde)
        divergence = float(np.max(np.abs(lie_divergence(s.reeb, volume).at(pts))))
        return _result('area', len(seeds), result.area_defect_max, self.context.tol('area'),
                       passed=result.area_defect_max <= self.context.tol('area')
                       and divergence <= self.context.tol('divergence'),
                       reeb_divergence_max=divergence)

    def check_gauge(self) -> CheckResult:
        s = self.structure
        gauge = gauge_normalize(s.alpha, s.c, s.tori.center, s.tori.r1,
                                self.context.first_order_samples, self.context.seed)
        tol = self.context.tol('gauge_residual')
        return _result('gauge', gauge.sample_count, gauge.residual_max, tol,
                       passed=gauge.residual_max <= tol and gauge.det_min > 0, **gauge.to_dict())

    def _dispatch(self) -> Dict[str, Callable]:
        return {
            'cosymplectic': self.check_cosymplectic,
            'deformation': self.check_deformation,
            'metric': self.check_metric,
            'harmonicity': self.check_harmonicity,
            'ns': self.check_ns,
            'symmetry': self.check_symmetry,
            'return-map': self.check_return_map,
            'locality': self.check_locality,
            'area': self.check_area,
            'gauge': self.check_gauge,
        }

    def run(self, name: str, nu_list: Sequence[float] = DEFAULT_VISCOSITIES) -> List[CheckResult]:
        """Run one named check; failures inside it become a failed result."""
        if name not in CHECK_NAMES:
            raise KeyError(f"Unknown check '{name}'. Known checks: {', '.join(CHECK_NAMES)}")
        method = self._dispatch()[name]
        start = time.time()
        try:
            outcome = method(nu_list) if name == 'ns' else method()
        except TuringFlowError as e:
            logger.error(f"Check {name} raised", error=e.to_dict())
            outcome = CheckResult(name, 0, None, None, False, CERTIFIES[name], e.to_dict())
        logger.debug(f"Check {name} finished", duration=time.time() - start)
        return outcome if isinstance(outcome, list) else [outcome]

    def run_all(self, names: Sequence[str] = BUILD_CHECKS,
                nu_list: Sequence[float] = DEFAULT_VISCOSITIES) -> List[CheckResult]:
        results = []
        for name in names:
            results.extend(self.run(name, nu_list))
        return results

    @staticmethod
    def overall_status(results: Sequence[CheckResult]) -> bool:
        return bool(results) and all(r.passed for r in results)

    def build_report(self, nu_list: Sequence[float] = DEFAULT_VISCOSITIES,
                     names: Sequence[str] = BUILD_CHECKS) -> Dict[str, Any]:
        """JSON-ready report; contains no timings so it is reproducible for a fixed seed."""
        results = self.run_all(names, nu_list)
        return {
            'passed': self.overall_status(results),
            'checks': [r.to_dict() for r in results],
            'context': self.context.to_dict(),
            'viscosities': [float(nu) for nu in nu_list],
        }
