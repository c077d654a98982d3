"""Subcommand handlers.

Each handler returns ``(exit_code, report)``; the CLI prints the report and
writes it (plus any CSV dumps) into ``--out`` when given.
"""

from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from config.constants import CERTIFIES, DEFAULT_VISCOSITIES, EXIT_ERROR, EXIT_OK, EXIT_STILL_RUNNING, TOLERANCES
from config.settings import Settings, load_settings
from models.flow_models import BuildDescriptor, GaugeDescriptor, IsotopyDescriptor
from models.machine_models import MachineFile, TapeFile
from monitoring.checks import CHECK_NAMES, CheckContext, VerificationRunner
from services.calculus.cosymplectic import reeb_solve
from services.calculus.fields import ThreeForm
from services.calculus.navier_stokes import require_viscosity
from services.calculus.operators import lie_divergence
from services.calculus.sampling import sample_disk, sample_disk_seeds
from services.gluing import build_turing_flow, field_grid, glue
from services.shift_encoding import (check_turing_equivalence, compile_shift, encode_config,
                                     in_halting_cylinder, shift_orbit)
from services.suspension import (SectionSpec, convergence_report, disk_map, gauge_normalize, manufactured_alpha,
                                 reeb_trajectory, return_map, suspend)
from services.tm_core import Configuration, Halted, encode_machine, machine_bits, program_input, run
from utils.errors import InputFileError, UsageError
from utils.export import (disk_map_frame, orbit_frame, return_map_frame, trajectory_frame, write_csv,
                          write_json)
from utils.logger import get_enhanced_logger
from utils.structure_store import StructureStore, content_key
from utils.validators import FileValidator, load_model

logger = get_enhanced_logger(__name__)

Report = Dict[str, Any]


class CommandRunner:
    """Holds the shared dependencies of one CLI invocation."""

    def __init__(self, settings: Optional[Settings] = None, out: Optional[str] = None,
                 cache_dir: Optional[str] = None, seed: Optional[int] = None,
                 samples: Optional[int] = None, tol: Optional[float] = None, seeds: Optional[int] = None):
        self.settings = settings or load_settings()
        self.out = Path(out) if out else None
        self.cache_dir = cache_dir
        self.seed_override = seed
        self.seed = self.settings.sampling.seed if seed is None else seed
        self.samples = samples
        self.tol = tol
        self.seeds_override = seeds
        self.seeds = seeds or self.settings.sampling.seeds
        self.file_validator = FileValidator()

    # helpers

    def _load(self, path, model):
        return load_model(path, model, self.file_validator)

    def _machine(self, path):
        return self._load(path, MachineFile).to_machine()

    def _tape(self, path):
        if path is None:
            return TapeFile().to_tape()
        return self._load(path, TapeFile).to_tape()

    def _isotopy(self, path) -> IsotopyDescriptor:
        return self._load(path, IsotopyDescriptor) if path else IsotopyDescriptor()

    def _context(self, **overrides) -> CheckContext:
        context = CheckContext.from_settings(self.settings.sampling, seed=self.seed, seeds=self.seeds)
        if self.samples:
            context = replace(context, first_order_samples=self.samples, second_order_samples=self.samples,
                              positivity_samples=self.samples, outside_samples=self.samples)
        return replace(context, **{k: v for k, v in overrides.items() if v is not None})

    def _integrator(self) -> Dict[str, float]:
        rtol = self.tol or self.settings.sampling.rtol
        atol = self.tol or self.settings.sampling.atol
        return {'rtol': rtol, 'atol': atol}

    def _write_csv(self, frame, name: str):
        if self.out is not None:
            write_csv(frame, self.out / name)

    def write_report(self, name: str, report: Report):
        if self.out is not None:
            write_json(self.out / f'{name}.json', report)

    def _store(self) -> StructureStore:
        return StructureStore(cache_dir=self.cache_dir or self.settings.cache.cache_dir)

    # machines and shifts

    def cmd_tm_run(self, machine_path, tape_path, horizon: int) -> Tuple[int, Report]:
        machine = self._machine(machine_path)
        outcome = run(machine, self._tape(tape_path), horizon)
        report = {'command': 'tm-run', 'horizon': horizon, 'outcome': outcome.to_dict()}
        return (EXIT_OK if isinstance(outcome, Halted) else EXIT_STILL_RUNNING), report

    def cmd_tm_encode(self, machine_path, tape_path=None) -> Tuple[int, Report]:
        machine = self._machine(machine_path)
        encoding = encode_machine(machine)
        report = {
            'command': 'tm-encode',
            'machine': machine.to_dict(),
            'encoding': encoding.to_dict(),
            'split': len(machine_bits(machine)),
        }
        if tape_path is not None:
            report['program_input'] = program_input(machine, self._tape(tape_path)).to_dict()
        return EXIT_OK, report

    def cmd_shift_orbit(self, machine_path, tape_path, horizon: int) -> Tuple[int, Report]:
        machine = self._machine(machine_path)
        tape = self._tape(tape_path)
        G = compile_shift(machine)
        start = encode_config(machine, Configuration(machine.q_init, tape))
        orbit = shift_orbit(G, start, horizon)
        halted = in_halting_cylinder(machine, orbit[-1])
        self._write_csv(orbit_frame(orbit), 'orbit.csv')
        report = {
            'command': 'shift-orbit',
            'horizon': horizon,
            'pieces': len(G.pieces),
            'iterates': len(orbit) - 1,
            'halting_cylinder': halted,
            'orbit': [p.to_dict() for p in orbit],
        }
        return (EXIT_OK if halted else EXIT_STILL_RUNNING), report

    def cmd_equiv(self, machine_path, tape_path, horizon: int, window: int) -> Tuple[int, Report]:
        machine = self._machine(machine_path)
        result = check_turing_equivalence(machine, self._tape(tape_path), horizon, window)
        report = {'command': 'equiv', **result.to_dict()}
        return (EXIT_OK if result.agreement else EXIT_ERROR), report

    # disk maps and suspensions

    def cmd_disk_map(self, isotopy_path) -> Tuple[int, Report]:
        desc = self._isotopy(isotopy_path)
        iso = desc.to_isotopy()
        seeds = sample_disk_seeds((0.0, 0.0), iso.disk_radius, self.seeds, self.seed)
        result = disk_map(iso, seeds, **self._integrator())
        self._write_csv(disk_map_frame(seeds, result.images, result.determinants), 'disk_map.csv')
        tol = TOLERANCES['area']
        passed = result.area_defect_max <= tol
        report = {
            'command': 'disk-map',
            'isotopy': iso.to_dict(),
            'check': 'area',
            'certifies': CERTIFIES['area'],
            'sample_count': len(seeds),
            'max_residual': result.area_defect_max,
            'tolerance': tol,
            'passed': passed,
            'integrator': self._integrator(),
        }
        return (EXIT_OK if passed else EXIT_ERROR), report

    def cmd_suspend(self, isotopy_path) -> Tuple[int, Report]:
        desc = self._isotopy(isotopy_path)
        iso = desc.to_isotopy()
        context = self._context()
        structure = suspend(iso, desc.c, context.first_order_samples, self.seed)

        points = sample_disk((0.0, 0.0), iso.disk_radius, context.second_order_samples, self.seed + 1)
        reeb = structure.reeb.at(points)
        solved = np.stack([np.broadcast_to(np.asarray(v, dtype=float), (len(points),))
                           for v in reeb_solve(structure.pair, tuple(points.T))], axis=1)
        volume = ThreeForm(lambda p: (desc.c + 0.0 * p[2],), 'c_vol')
        divergence = float(np.max(np.abs(lie_divergence(structure.reeb, volume).at(points))))
        reeb_defect = float(np.max(np.abs(reeb - solved)))

        tol = TOLERANCES['structural']
        passed = reeb_defect <= tol and divergence <= TOLERANCES['divergence']
        report = {
            'command': 'suspend',
            'check': 'cosymplectic',
            'certifies': CERTIFIES['cosymplectic'],
            'isotopy': iso.to_dict(),
            'c': desc.c,
            'validation': structure.validation,
            'reeb_defect_max': reeb_defect,
            'reeb_divergence_max': divergence,
            'tolerance': tol,
            'passed': passed,
        }
        return (EXIT_OK if passed else EXIT_ERROR), report

    def cmd_return_map(self, isotopy_path) -> Tuple[int, Report]:
        desc = self._isotopy(isotopy_path)
        iso = desc.to_isotopy()
        context = self._context()
        structure = suspend(iso, desc.c, context.first_order_samples, self.seed)
        section = SectionSpec(radius=iso.disk_radius, **self._integrator())
        seeds = sample_disk_seeds((0.0, 0.0), iso.disk_radius, self.seeds, self.seed)

        expected = disk_map(iso, seeds, **self._integrator()).images
        hits, times = return_map(structure, section, seeds)
        errors = np.linalg.norm(hits - expected, axis=1)
        self._write_csv(return_map_frame(seeds, hits, times, expected), 'return_map.csv')
        self._write_csv(trajectory_frame(reeb_trajectory(structure, section, seeds[0])), 'trajectory.csv')

        tol = TOLERANCES['return_map']
        time_error = float(np.max(np.abs(times - desc.c)))
        passed = float(np.max(errors)) <= tol and time_error <= TOLERANCES['return_time']
        report = {
            'command': 'return-map',
            'check': 'return-map',
            'certifies': CERTIFIES['return-map'],
            'isotopy': iso.to_dict(),
            'c': desc.c,
            'sample_count': len(seeds),
            'max_residual': float(np.max(errors)),
            'return_time_error_max': time_error,
            'tolerance': tol,
            'passed': passed,
            'integrator': self._integrator(),
            'convergence': convergence_report(structure, section, seeds),
        }
        return (EXIT_OK if passed else EXIT_ERROR), report

    def cmd_gauge(self, descriptor_path=None) -> Tuple[int, Report]:
        desc = self._load(descriptor_path, GaugeDescriptor) if descriptor_path else GaugeDescriptor()
        alpha, generator = manufactured_alpha(desc.c, desc.epsilon, desc.center, desc.radius)
        samples = self.samples or desc.samples or self.settings.sampling.first_order_samples
        result = gauge_normalize(alpha, desc.c, desc.center, desc.radius, samples,
                                 self.seed_override if self.seed_override is not None else desc.seed,
                                 reference=generator)
        tol = self.tol or TOLERANCES['gauge_residual']
        passed = result.residual_max <= tol and result.det_min > 0
        report = {
            'command': 'gauge',
            'check': 'gauge',
            'certifies': CERTIFIES['gauge'],
            'descriptor': desc.model_dump(mode='json'),
            **result.to_dict(),
            'tolerance': tol,
            'passed': passed,
        }
        return (EXIT_OK if passed else EXIT_ERROR), report

    # glued structures

    def _descriptor(self, path) -> BuildDescriptor:
        desc = self._load(path, BuildDescriptor)
        return desc.resolve(Path(path).parent)

    def cmd_build(self, descriptor_path) -> Tuple[int, Report]:
        desc = self._descriptor(descriptor_path)
        context = self._merge(desc.to_context())
        iso = desc.isotopy.to_isotopy()
        tori = desc.radii.to_tori()
        structure, report = build_turing_flow(iso, tori, desc.c, desc.nu_list, context)

        payload = desc.model_dump(mode='json')
        stored = self.settings.cache.cache_enabled
        if stored:
            store = self._store()
            try:
                key = store.put(payload)
            finally:
                store.close()
        else:
            key = content_key(payload)

        for name, target in (('beta_tilde', structure.beta_tilde), ('g_tilde', structure.g_tilde),
                             ('X_tilde', structure.X_tilde), ('pressure', structure.pressure)):
            self._write_csv(field_grid(target, 0.0, tori), f'grid_{name}.csv')

        report = {'command': 'build', 'structure_key': key, 'stored': stored, **report}
        return (EXIT_OK if report['passed'] else EXIT_ERROR), report

    def _merge(self, context: CheckContext) -> CheckContext:
        """Command-line overrides win over descriptor values."""
        overrides: Dict[str, Any] = {'seed': self.seed_override if self.seed_override is not None else context.seed}
        if self.samples:
            overrides.update(first_order_samples=self.samples, second_order_samples=self.samples,
                             positivity_samples=self.samples, outside_samples=self.samples)
        if self.seeds_override:
            overrides['seeds'] = self.seeds_override
        return replace(context, **overrides)

    def cmd_verify(self, reference: str, check: str, nu_list: Optional[List[float]] = None) -> Tuple[int, Report]:
        if check not in CHECK_NAMES:
            raise UsageError(f"Unknown check '{check}'", {'known': list(CHECK_NAMES)})
        desc = self._reference(reference)
        context = self._merge(desc.to_context())
        if self.tol is not None:
            if check in ('return-map', 'area'):
                context = replace(context, rtol=self.tol, atol=self.tol)
            else:
                context = replace(context, tolerance=self.tol)
        nus = [require_viscosity(nu) for nu in (nu_list or desc.nu_list or DEFAULT_VISCOSITIES)]

        structure = glue(desc.isotopy.to_isotopy(), desc.radii.to_tori(), desc.c,
                         context.positivity_samples, context.seed)
        runner = VerificationRunner(structure, context)
        report = runner.build_report(nus, names=(check,))
        report = {'command': 'verify', 'reference': reference, 'check': check, **report}
        return (EXIT_OK if report['passed'] else EXIT_ERROR), report

    def _reference(self, reference: str) -> BuildDescriptor:
        path = Path(reference)
        if path.is_file():
            return self._descriptor(path)
        store = self._store()
        try:
            payload = store.get(reference)
        finally:
            store.close()
        if payload is None:
            raise InputFileError("No descriptor file or stored structure with this reference",
                                 {'reference': reference})
        return BuildDescriptor.model_validate(payload)
