"""Forms calculus with forward-mode derivative propagation."""

from services.calculus.cosymplectic import (flat_pair, metric_from_pair, metric_pair_residuals, pair_from_metric,
                                            pair_residuals, reeb_field, reeb_solve)
from services.calculus.fields import (FLAT_METRIC, FLAT_TORUS, Chart, CosymplecticPair, MetricField, OneForm,
                                      ScalarField, ThreeForm, TwoForm, VectorField)
from services.calculus.navier_stokes import ns_residual, ns_residual_sweep, pressure, symmetry_check
from services.calculus.operators import (codifferential, ext_d, finite_difference_check, flat, hodge_laplacian,
                                         hodge_star, interior, lie_divergence, pullback_along_map, sharp, wedge)
from services.calculus.riemannian import christoffel

__all__ = [
    'Chart', 'CosymplecticPair', 'FLAT_METRIC', 'FLAT_TORUS', 'MetricField', 'OneForm', 'ScalarField',
    'ThreeForm', 'TwoForm', 'VectorField',
    'christoffel', 'codifferential', 'ext_d', 'finite_difference_check', 'flat', 'flat_pair',
    'hodge_laplacian', 'hodge_star', 'interior', 'lie_divergence', 'metric_from_pair', 'metric_pair_residuals',
    'ns_residual', 'ns_residual_sweep', 'pair_from_metric', 'pair_residuals', 'pressure', 'pullback_along_map',
    'reeb_field', 'reeb_solve', 'sharp', 'symmetry_check', 'wedge',
]
