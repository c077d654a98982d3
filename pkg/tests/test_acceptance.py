"""
Property-based acceptance suite for the whole pipeline.

Each class covers one property end to end at the sample sizes used for
release runs. These tests are marked ``acceptance``; the heavy ones also ``slow``.
"""

import time

import numpy as np
import pytest

from monitoring.checks import CheckContext, VerificationRunner
from services.calculus.fields import (FLAT_METRIC, FLAT_TORUS, MetricField, OneForm, ScalarField, ThreeForm,
                                      TwoForm, VectorField)
from services.calculus.jets import cos, exp, sin
from services.calculus.navier_stokes import ns_residual
from services.calculus.operators import codifferential, ext_d, finite_difference_check, hodge_star, wedge
from services.calculus.sampling import sample_chart, sample_disk, sample_disk_seeds, sample_outside
from services.shift_encoding import compile_shift, encode_config, shift_step, sweep_equivalence
from services.suspension import SectionSpec, disk_map, gauge_normalize, manufactured_alpha, return_map, suspend
from services.tm_core import Configuration, random_machine, random_tape, step

TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def release_context():
    return CheckContext(seed=2, first_order_samples=10_000, second_order_samples=1_000,
                        positivity_samples=100_000, outside_samples=1_000, seeds=20)


@pytest.fixture(scope="module")
def release_runner(glued_rotation, release_context):
    return VerificationRunner(glued_rotation, release_context)


@pytest.mark.acceptance
class TestDiscreteEquivalence:
    """Halting iff the shift orbit reaches the halting region."""

    @pytest.mark.parametrize('name', ['flip', 'zseek', 'bounce'])
    def test_every_small_input(self, request, name):
        machine = request.getfixturevalue(name)
        start = time.perf_counter()
        reports = list(sweep_equivalence(machine, -4, 4, 200, 8))
        assert len(reports) == 512
        assert all(r.agreement for r in reports)
        assert time.perf_counter() - start < 60

    def test_looping_and_halting_inputs_both_occur(self, bounce):
        reports = list(sweep_equivalence(bounce, -4, 4, 200, 8))
        assert any(r.halts for r in reports)
        assert any(not r.halts for r in reports)


@pytest.mark.acceptance
class TestExactConjugacy:
    """Shift step and machine step commute with the encoding, in exact arithmetic."""

    def test_random_configurations(self):
        rng = np.random.default_rng(2024)
        checked = 0
        for _ in range(20):
            machine = random_machine(rng, max_states=5)
            G = compile_shift(machine)
            for piece in G.pieces:
                assert piece.determinant == 1
            running = [q for q in machine.states if q != machine.q_halt]
            for _ in range(500):
                state = running[int(rng.integers(0, len(running)))]
                config = Configuration(state, random_tape(rng, -8, 8))
                assert shift_step(G, encode_config(machine, config)) == encode_config(machine, step(machine, config))
                checked += 1
        assert checked == 10_000


@pytest.mark.acceptance
@pytest.mark.slow
class TestReturnMapEqualsDiskMap:
    """Return map of a suspension versus the disk map, at integrator tolerance 1e-9."""

    @pytest.mark.parametrize('fixture', ['rotation', 'shear'])
    def test_hundred_seeds(self, request, fixture):
        iso = request.getfixturevalue(fixture)
        structure = suspend(iso, 1.0, n_samples=1000)
        seeds = sample_disk_seeds((0.0, 0.0), iso.disk_radius, 100, 17)
        section = SectionSpec(rtol=1e-9, atol=1e-9)
        hits, times = return_map(structure, section, seeds)
        images = disk_map(iso, seeds, rtol=1e-9, atol=1e-9).images
        assert np.max(np.linalg.norm(hits - images, axis=1)) < 1e-6
        assert np.max(np.abs(times - 1.0)) < 1e-9


@pytest.mark.acceptance
@pytest.mark.slow
class TestGluedStructure:
    """Deformation, metric, harmonicity, flow and symmetry on the default build."""

    def test_deformation(self, glued_rotation):
        s = glued_rotation
        interior = sample_disk(s.tori.center, s.tori.r1, 10_000, 31)
        assert np.max(np.abs(ext_d(s.beta_tilde).at(interior))) < 1e-10
        dense = np.vstack([sample_chart(FLAT_TORUS, 50_000, 32), sample_disk(s.tori.center, s.tori.r1, 50_000, 33)])
        assert np.min(wedge(s.alpha, s.beta_tilde).at(dense)) > 0
        outside = sample_outside(s.tori.center, s.tori.rT, 1_000, 34)
        assert np.max(np.abs(s.beta_tilde.at(outside) - [0.0, 0.0, 1.0])) < 1e-12

    @pytest.mark.parametrize('name', ['cosymplectic', 'deformation', 'metric', 'harmonicity', 'symmetry',
                                      'locality'])
    def test_release_checks(self, release_runner, name):
        result = release_runner.run(name)[0]
        assert result.passed, result.details

    def test_star_alpha_matches_beta(self, glued_rotation):
        s = glued_rotation
        pts = sample_disk(s.tori.center, s.tori.r1, 10_000, 35)
        assert np.max(np.abs(hodge_star(s.g_tilde, s.alpha).at(pts) - s.beta_tilde.at(pts))) < 1e-10
        outside = sample_outside(s.tori.center, s.tori.rT, 1_000, 36)
        assert np.max(np.abs(s.g_tilde.at(outside) - np.eye(3))) < 1e-12

    def test_viscosity_independence(self, release_runner):
        results = release_runner.run('ns', [0.0, 0.1, 1.0])
        assert len(results) == 3
        for result in results:
            assert result.passed, result.details
            assert result.sample_count == 1_000
            assert result.max_residual < 1e-6
            assert result.details['divergence_max'] < 1e-8

    def test_broken_field_is_rejected(self):
        X = VectorField(lambda p: (0.3 * sin(TWO_PI * p[1]), 0.0 * p[0], 1.0 + 0.0 * p[0]), 'shear')
        pts = sample_chart(FLAT_TORUS, 1_000, 37)
        for nu in (0.0, 0.1, 1.0):
            assert ns_residual(X, FLAT_METRIC, nu, pts).momentum_residual_max >= 0.1

    def test_time_dependent_shear_is_rejected(self):
        X = VectorField(lambda p: (sin(TWO_PI * p[2]), 0.0 * p[0], 0.0 * p[0]), 'sin_t_dx')
        pts = sample_chart(FLAT_TORUS, 1_000, 38)
        pts[:, 2] = 0.125
        report = ns_residual(X, FLAT_METRIC, 0.0, pts)
        assert report.momentum_residual_max >= 0.1
        assert report.momentum_residual_max == pytest.approx(np.pi, rel=1e-9)

    def test_return_map_of_glued_structure(self, release_runner):
        result = release_runner.run('return-map')[0]
        assert result.passed, result.details


@pytest.mark.acceptance
class TestGaugeNormalization:
    """Manufactured closed forms are pulled back from c dt."""

    @pytest.mark.parametrize('c,epsilon', [(1.0, 0.01), (2.0, 0.05)])
    def test_manufactured_forms(self, c, epsilon):
        alpha, generator = manufactured_alpha(c, epsilon)
        result = gauge_normalize(alpha, c, (0.0, 0.0), 1.0, n_samples=10_000, seed=5, reference=generator)
        assert result.residual_max < 1e-7
        assert result.det_min > 0


@pytest.mark.acceptance
class TestCalculusSubstrate:
    """Operator identities on analytic fields."""

    @pytest.fixture
    def pts(self):
        return sample_chart(FLAT_TORUS, 500, 41)

    @staticmethod
    def metric() -> MetricField:
        def fn(p):
            x, y, t = p
            return ((1.5 + 0.2 * cos(TWO_PI * t), 0.1 * sin(TWO_PI * x), 0.0 * x),
                    (0.1 * sin(TWO_PI * x), 2.0 + 0.1 * y, 0.0 * x),
                    (0.0 * x, 0.0 * x, 1.0 + 0.3 * sin(TWO_PI * y) ** 2))
        return MetricField(fn, 'analytic')

    def test_identities(self, pts):
        start = time.perf_counter()
        f = ScalarField(lambda p: (sin(TWO_PI * p[0]) * exp(0.5 * p[2]) + p[1] ** 3,), 'f')
        a = OneForm(lambda p: (cos(TWO_PI * p[1]) * p[2], p[0] * p[0], sin(TWO_PI * (p[0] + p[2]))), 'a')
        b = TwoForm(lambda p: (p[1] * p[2], cos(TWO_PI * p[0]), exp(0.2 * p[1])), 'b')
        v = ThreeForm(lambda p: (cos(TWO_PI * p[0]) * p[1] + exp(0.3 * p[2]),), 'v')
        g = self.metric()

        assert np.max(np.abs(ext_d(ext_d(f)).at(pts))) < 1e-10
        assert np.max(np.abs(ext_d(ext_d(a)).at(pts))) < 1e-10
        assert np.max(np.abs(codifferential(g, codifferential(g, b)).at(pts))) < 1e-10
        for form in (f, a, b, v):
            assert np.max(np.abs(hodge_star(g, hodge_star(g, form)).at(pts) - form.at(pts))) < 1e-10
        for form in (f, a, b):
            report = finite_difference_check(form, pts)
            assert report['max_abs_error'] < 1e-6
        assert time.perf_counter() - start < 30
