"""
Hamiltonian disk maps, suspensions, Poincare return maps and gauge normalization.
"""

from types import SimpleNamespace

import numpy as np
import pytest

from services.calculus.fields import OneForm, ScalarField, VectorField
from services.calculus.jets import primal
from services.calculus.operators import ext_d
from services.calculus.sampling import sample_disk, sample_disk_seeds
from services.suspension import (SectionSpec, convergence_report, disk_map, gauge_normalize, ham_vector_field,
                                 loop_integral, manufactured_alpha, numerical_pullback_beta, poincare_return,
                                 polynomial_isotopy, reeb_trajectory, return_map, rotation_isotopy, suspend,
                                 suspension_beta, wrap_time, zero_isotopy)
from utils.errors import IntegrationFailure, NonClosed, NonCohomologous, TransversalityLoss, ValidationFailure


def rotate(points, angle):
    """Clockwise rotation by ``angle``."""
    c, s = np.cos(angle), np.sin(angle)
    x, y = points[:, 0], points[:, 1]
    return np.column_stack([c * x + s * y, -s * x + c * y])


@pytest.mark.unit
class TestIsotopies:
    """Generators and their validation."""

    def test_rotation_generator_inside_core(self, rotation):
        # H = tau(t) * |p|^2 / 2 on the rigid core; tau peaks at the window midpoint
        value = primal(rotation.H((0.1, 0.2, 0.5)))
        assert value == pytest.approx(0.5 * 0.05 * 2 / 0.6)

    def test_generator_vanishes_outside_support(self, rotation):
        assert primal(rotation.H((0.85, 0.0, 0.5))) == 0.0
        assert primal(rotation.H((0.1, 0.0, 0.1))) == 0.0

    def test_time_is_periodic(self, rotation):
        assert primal(rotation.H((0.1, 0.2, 1.5))) == pytest.approx(primal(rotation.H((0.1, 0.2, 0.5))))
        assert wrap_time(2.25) == pytest.approx(0.25)
        assert wrap_time(-0.25) == pytest.approx(0.75)

    def test_invalid_window(self):
        with pytest.raises(ValidationFailure):
            rotation_isotopy(1.0, 0.4, 0.8, t_window=(0.5, 0.4))

    def test_invalid_cutoff_radii(self):
        with pytest.raises(ValidationFailure):
            rotation_isotopy(1.0, 0.8, 0.4)

    def test_support_must_fit_in_disk(self):
        with pytest.raises(ValidationFailure):
            rotation_isotopy(1.0, 0.4, 1.2, disk_radius=1.0)

    def test_polynomial_parameters(self):
        iso = polynomial_isotopy({(1, 1): 0.5, (0, 0): 0.2}, 0.3, 0.6)
        data = iso.to_dict()
        assert data['profile'] == 'custom-polynomial'
        assert data['params']['coefficients'] == [('0,0', 0.2), ('1,1', 0.5)]
        assert iso.support_radius == 0.6

    def test_hamiltonian_vector_field(self, rotation):
        vx, vy = ham_vector_field(rotation, 0.5, (0.1, 0.2))
        tau = 2 / 0.6
        assert primal(vx) == pytest.approx(tau * 0.2)
        assert primal(vy) == pytest.approx(-tau * 0.1)


@pytest.mark.unit
class TestDiskMap:
    """Time-one maps from the variational equations."""

    def test_rotation_core_rotates(self, rotation):
        seeds = sample_disk_seeds((0.0, 0.0), 0.3, 20, 1)
        result = disk_map(rotation, seeds, rtol=1e-10, atol=1e-12)
        assert np.max(np.abs(result.images - rotate(seeds, 1.0))) < 1e-7

    def test_shear_core_shears(self, shear):
        seeds = sample_disk_seeds((0.0, 0.0), 0.2, 20, 2)
        result = disk_map(shear, seeds, rtol=1e-10, atol=1e-12)
        expected = np.column_stack([seeds[:, 0] + 0.5 * seeds[:, 1], seeds[:, 1]])
        assert np.max(np.abs(result.images - expected)) < 1e-7

    def test_area_preserved(self, rotation, shear):
        seeds = sample_disk_seeds((0.0, 0.0), 1.0, 30, 3)
        for iso in (rotation, shear):
            assert disk_map(iso, seeds, rtol=1e-11, atol=1e-12).area_defect_max < 1e-8

    def test_zero_isotopy_is_identity(self):
        seeds = sample_disk_seeds((0.0, 0.0), 1.0, 10, 4)
        result = disk_map(zero_isotopy(), seeds)
        assert np.allclose(result.images, seeds)
        assert np.allclose(result.determinants, 1.0)

    def test_outside_support_is_fixed(self, rotation):
        seeds = np.array([[0.9, 0.0], [0.0, -0.85]])
        assert np.allclose(disk_map(rotation, seeds).images, seeds)


@pytest.mark.unit
class TestSuspension:
    """Mapping-torus structures."""

    def test_validation_report(self, rotation):
        structure = suspend(rotation, 2.0, n_samples=500)
        report = structure.validation
        assert report['d_beta_max'] < 1e-10
        assert report['volume_min'] == pytest.approx(2.0)
        assert report['flat_outside_max'] <= 1e-12

    def test_reeb_field(self, rotation):
        structure = suspend(rotation, 2.0, n_samples=200)
        pts = sample_disk((0.0, 0.0), 1.0, 50, 5)
        Y = structure.reeb.at(pts)
        assert np.allclose(Y[:, 2], 0.5)
        assert np.allclose(structure.alpha.at(pts) @ np.array([0.0, 0.0, 1.0]) * Y[:, 2], 1.0)

    def test_non_positive_c_rejected(self, rotation):
        with pytest.raises(ValidationFailure):
            suspend(rotation, 0.0, n_samples=10)

    def test_closed_form_matches_numerical_pullback(self, shear):
        pts = np.array([[0.1, 0.05, 0.35], [-0.2, 0.1, 0.5], [0.3, -0.1, 0.7], [0.05, 0.2, 0.9]])
        closed = suspension_beta(shear).at(pts)
        numerical = numerical_pullback_beta(shear, pts)
        assert np.max(np.abs(closed - numerical)) < 1e-5


@pytest.mark.unit
class TestReturnMap:
    """First returns of the Reeb flow to the section t = 0."""

    def test_return_equals_disk_map(self, rotation):
        structure = suspend(rotation, 1.0, n_samples=200)
        seeds = sample_disk_seeds((0.0, 0.0), 0.9, 6, 6)
        hits, times = return_map(structure, SectionSpec(), seeds)
        images = disk_map(rotation, seeds).images
        assert np.max(np.linalg.norm(hits - images, axis=1)) < 1e-6
        assert np.max(np.abs(times - 1.0)) < 1e-9

    def test_return_time_scales_with_c(self, shear):
        structure = suspend(shear, 1.7, n_samples=200)
        result = poincare_return(structure, SectionSpec(), (0.1, 0.1))
        assert result.time == pytest.approx(1.7, abs=1e-9)
        assert result.evaluations > 0

    def test_start_outside_section(self, rotation):
        structure = suspend(rotation, 1.0, n_samples=200)
        with pytest.raises(ValidationFailure):
            poincare_return(structure, SectionSpec(radius=0.5), (0.6, 0.0))

    def test_transversality_loss(self):
        stalled = SimpleNamespace(c=1.0, reeb=VectorField(lambda p: (1.0 + 0.0 * p[0], 0.0 * p[0], 0.0 * p[0])))
        with pytest.raises(TransversalityLoss):
            poincare_return(stalled, SectionSpec(), (0.0, 0.0))

    def test_no_return_within_max_time(self, rotation):
        structure = suspend(rotation, 1.0, n_samples=200)
        with pytest.raises(IntegrationFailure):
            poincare_return(structure, SectionSpec(max_time=0.5), (0.1, 0.0))

    def test_default_time_cap_scales_with_c(self):
        slow = VectorField(lambda p: (0.0 * p[0], 0.0 * p[0], 0.05 + 0.0 * p[0]))
        with pytest.raises(IntegrationFailure) as excinfo:
            poincare_return(SimpleNamespace(c=1.0, reeb=slow), SectionSpec(), (0.0, 0.0))
        assert excinfo.value.details['max_time'] == pytest.approx(10.0)
        result = poincare_return(SimpleNamespace(c=3.0, reeb=slow), SectionSpec(), (0.0, 0.0))
        assert result.time == pytest.approx(20.0)

    def test_trajectory_rows(self, rotation):
        structure = suspend(rotation, 1.0, n_samples=200)
        rows = reeb_trajectory(structure, SectionSpec(), (0.2, 0.0), n_points=50)
        assert rows.shape == (50, 4)
        assert np.allclose(rows[0], [0.0, 0.2, 0.0, 0.0])
        assert rows[-1, 3] == pytest.approx(1.0, abs=1e-9)

    def test_convergence_report(self, shear):
        structure = suspend(shear, 1.0, n_samples=200)
        seeds = sample_disk_seeds((0.0, 0.0), 0.5, 4, 7)
        report = convergence_report(structure, SectionSpec(), seeds)
        assert report['seed_count'] == 4
        assert report['max_change'] < 1e-6


@pytest.mark.unit
class TestGauge:
    """Gauge changes pulling c dt back to a cohomologous closed form."""

    def test_manufactured_form_is_normalized(self):
        alpha, generator = manufactured_alpha(1.0, 0.01)
        result = gauge_normalize(alpha, 1.0, (0.0, 0.0), 1.0, n_samples=1500, seed=2, reference=generator)
        assert result.residual_max < 1e-7
        assert result.det_min > 0
        assert result.potential_error_max < 1e-8
        assert result.loop_error_max < 1e-9

    def test_transform_pulls_back(self):
        alpha, _ = manufactured_alpha(2.0, 0.05)
        result = gauge_normalize(alpha, 2.0, (0.0, 0.0), 1.0, n_samples=500, seed=3)
        pts = sample_disk((0.0, 0.0), 1.0, 100, 4)
        # c t' with t' the new time coordinate has differential alpha
        t_new = ScalarField(lambda p: (2.0 * result.transform(p)[2],), 't_new')
        assert np.max(np.abs(ext_d(t_new).at(pts) - alpha.at(pts))) < 1e-7

    def test_non_closed_form_rejected(self):
        alpha = OneForm(lambda p: (p[1], 0.0 * p[0], 1.0 + 0.0 * p[0]), 'y_dx')
        with pytest.raises(NonClosed):
            gauge_normalize(alpha, 1.0, (0.0, 0.0), 0.5, n_samples=100)

    def test_wrong_period_rejected(self):
        alpha = OneForm(lambda p: (0.0 * p[0], 0.0 * p[0], 2.0 + 0.0 * p[0]), 'two_dt')
        with pytest.raises(NonCohomologous):
            gauge_normalize(alpha, 1.0, (0.0, 0.0), 0.5, n_samples=100)

    def test_loop_integral_of_dt(self):
        alpha = OneForm(lambda p: (0.0 * p[0], 0.0 * p[0], 3.0 + 0.0 * p[0]), 'three_dt')
        assert np.allclose(loop_integral(alpha, np.array([[0.1, 0.2], [0.3, -0.4]])), 3.0)

    def test_result_to_dict(self):
        alpha, generator = manufactured_alpha(1.0, 0.0)
        data = gauge_normalize(alpha, 1.0, (0.0, 0.0), 1.0, n_samples=100, reference=generator).to_dict()
        assert data['residual_max'] < 1e-12
        assert 'potential_error_max' in data
