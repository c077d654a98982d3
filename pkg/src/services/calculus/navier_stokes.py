"""Stationary Navier-Stokes residuals and the connection symmetry of closed duals."""

from dataclasses import dataclass
from typing import Dict, Iterable, List

import numpy as np

from services.calculus.fields import MetricField, ScalarField, VectorField
from services.calculus.operators import (codifferential, ext_d, flat, hodge_laplacian, inner, sharp)
from services.calculus.riemannian import christoffel_array, covariant_derivative_array, vector_partials_array
from services.calculus.sampling import random_vectors
from utils.errors import NegativeViscosity
from utils.logger import get_enhanced_logger

logger = get_enhanced_logger(__name__)


def require_viscosity(nu: float) -> float:
    if not nu >= 0:
        raise NegativeViscosity(f"Viscosity must be non-negative, got {nu}", {'nu': float(nu)})
    return float(nu)


def pressure(g: MetricField, X: VectorField) -> ScalarField:
    """``p = -1/2 g(X, X)``."""
    sq = inner(g, X, X)
    return ScalarField(lambda pt: (-0.5 * sq(pt)[0],), 'pressure')


@dataclass
class NSReport:
    nu: float
    sample_count: int
    momentum_residual_max: float
    divergence_max: float
    pressure_range: tuple

    def to_dict(self) -> Dict:
        return {
            'nu': self.nu,
            'sample_count': self.sample_count,
            'momentum_residual_max': self.momentum_residual_max,
            'divergence_max': self.divergence_max,
            'pressure_min': self.pressure_range[0],
            'pressure_max': self.pressure_range[1],
        }


class NavierStokesTerms:
    """Viscosity-independent pieces of the stationary momentum equation at a batch.

    ``inertial = nabla_X X + grad p`` and ``laplacian = (Delta X_flat)^sharp``, so
    the residual for viscosity ``nu`` is ``inertial - nu * laplacian``.
    """

    def __init__(self, X: VectorField, g: MetricField, points: np.ndarray):
        self.points = np.asarray(points, dtype=float)
        n = len(self.points)
        self.X = X
        self.g = g
        self.p = pressure(g, X)

        Xv = X.at(self.points)
        gamma = christoffel_array(g, self.points)
        DX = vector_partials_array(X, self.points)
        self.convective = covariant_derivative_array(DX, gamma, Xv, Xv)
        self.grad_p = sharp(g, ext_d(self.p)).at(self.points)
        self.inertial = self.convective + self.grad_p

        alpha = flat(g, X)
        self.laplacian = sharp(g, hodge_laplacian(g, alpha)).at(self.points)
        self.divergence = np.abs(codifferential(g, alpha).at(self.points)[:, 0])
        self.G = g.at(self.points)
        self.pressure_values = self.p.at(self.points)[:, 0]
        logger.debug("Navier-Stokes terms evaluated", samples=n)

    def residual_norm(self, nu: float) -> np.ndarray:
        R = self.inertial - nu * self.laplacian
        return np.sqrt(np.abs(np.einsum('ni,nij,nj->n', R, self.G, R)))

    def report(self, nu: float) -> NSReport:
        nu = require_viscosity(nu)
        return NSReport(
            nu=nu,
            sample_count=len(self.points),
            momentum_residual_max=float(np.max(self.residual_norm(nu))),
            divergence_max=float(np.max(self.divergence)),
            pressure_range=(float(np.min(self.pressure_values)), float(np.max(self.pressure_values))),
        )


def ns_residual(X: VectorField, g: MetricField, nu: float, points: np.ndarray) -> NSReport:
    require_viscosity(nu)
    return NavierStokesTerms(X, g, points).report(nu)


def ns_residual_sweep(X: VectorField, g: MetricField, nus: Iterable[float], points: np.ndarray) -> List[NSReport]:
    """One report per viscosity, sharing every derivative computation."""
    nus = [require_viscosity(nu) for nu in nus]
    terms = NavierStokesTerms(X, g, points)
    return [terms.report(nu) for nu in nus]


def symmetry_check(X: VectorField, g: MetricField, points: np.ndarray, seed: int = 0) -> Dict[str, float]:
    """Defects of ``g(nabla_Y X, Z) = g(nabla_Z X, Y)`` and ``Y(|X|^2/2) = g(nabla_X X, Y)``."""
    points = np.asarray(points, dtype=float)
    Y, Z = random_vectors(len(points), seed)
    Xv = X.at(points)
    G = g.at(points)
    gamma = christoffel_array(g, points)
    DX = vector_partials_array(X, points)

    nabla_Y = covariant_derivative_array(DX, gamma, Xv, Y)
    nabla_Z = covariant_derivative_array(DX, gamma, Xv, Z)
    nabla_X = covariant_derivative_array(DX, gamma, Xv, Xv)
    swap = np.abs(np.einsum('ni,nij,nj->n', nabla_Y, G, Z) - np.einsum('ni,nij,nj->n', nabla_Z, G, Y))

    half_sq = inner(g, X, X).scaled(0.5)
    d_half_sq = ext_d(half_sq).at(points)
    gradient = np.abs(np.einsum('ni,ni->n', d_half_sq, Y) - np.einsum('ni,nij,nj->n', nabla_X, G, Y))

    return {
        'sample_count': len(points),
        'swap_defect_max': float(np.max(swap)),
        'gradient_defect_max': float(np.max(gradient)),
        'max_defect': float(max(np.max(swap), np.max(gradient))),
    }
