"""
End-to-end tests of the command-line surface.
"""

import json

import pandas as pd
import pytest

from ui.cli import SUBCOMMANDS, build_parser, main


def invoke(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, json.loads(capsys.readouterr().out)


@pytest.mark.unit
class TestParser:
    """Argument parsing and usage errors."""

    def test_every_subcommand_registered(self):
        parser = build_parser()
        for name in SUBCOMMANDS:
            assert parser.parse_args([name, 'x.json'] + (['cosymplectic'] if name == 'verify' else [])).cmd == name

    def test_missing_subcommand(self, capsys):
        code, report = invoke(capsys)
        assert code == 1
        assert report['error'] == 'UsageError'

    def test_unknown_subcommand(self, capsys):
        code, report = invoke(capsys, 'simulate')
        assert code == 1
        assert report['error'] == 'UsageError'

    def test_bad_option_value(self, capsys, descriptors_dir):
        code, report = invoke(capsys, 'tm-run', descriptors_dir / 'flip.json', '--horizon', 'many')
        assert code == 1
        assert 'usage' in report['details']

    def test_negative_viscosity(self, capsys, descriptors_dir):
        code, report = invoke(capsys, 'verify', descriptors_dir / 'build_rotation.json', 'ns', '--nu', -1)
        assert code == 1
        assert report['error'] == 'UsageError'
        assert 'non-negative' in report['message']

    def test_window_alias(self):
        args = build_parser().parse_args(['equiv', 'm.json', '-m', '3'])
        assert args.window == 3


@pytest.mark.integration
class TestMachineCommands:
    """tm-run, tm-encode, shift-orbit and equiv."""

    def test_tm_run_halts(self, capsys, descriptors_dir):
        code, report = invoke(capsys, 'tm-run', descriptors_dir / 'flip.json')
        assert code == 0
        assert report['outcome'] == {'status': 'halted', 'steps': 1, 'output': {'ones': [0]}}

    def test_tm_run_still_running(self, capsys, descriptors_dir):
        code, report = invoke(capsys, 'tm-run', descriptors_dir / 'bounce.json', '--horizon', 20)
        assert code == 2
        assert report['outcome']['status'] == 'running'

    def test_missing_machine_file(self, capsys, tmp_path):
        code, report = invoke(capsys, 'tm-run', tmp_path / 'absent.json')
        assert code == 1
        assert report['error'] == 'InputFileError'

    def test_malformed_machine_file(self, capsys, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"states": ["q0"')
        code, report = invoke(capsys, 'tm-run', path)
        assert code == 1
        assert report['error'] == 'InputFileError'

    def test_non_total_machine(self, capsys, tmp_path):
        path = tmp_path / 'partial.json'
        path.write_text(json.dumps({'states': ['q0', 'qh'], 'q_init': 'q0', 'q_halt': 'qh',
                                    'delta': [{'from': 'q0', 'read': 0, 'to': 'qh', 'write': 1, 'shift': 0}]}))
        code, report = invoke(capsys, 'tm-run', path)
        assert code == 1
        assert report['error'] == 'MachineDefinitionError'

    def test_tm_encode(self, capsys, descriptors_dir):
        code, report = invoke(capsys, 'tm-encode', descriptors_dir / 'flip.json', descriptors_dir / 'tape_block.json')
        assert code == 0
        assert report['split'] == 12
        assert 'program_input' in report

    def test_shift_orbit_writes_csv(self, capsys, descriptors_dir, tmp_path):
        out = tmp_path / 'out'
        code, report = invoke(capsys, 'shift-orbit', descriptors_dir / 'zseek.json',
                              descriptors_dir / 'tape_block.json', '--out', out)
        assert code == 0
        assert report['halting_cylinder']
        frame = pd.read_csv(out / 'orbit.csv')
        assert len(frame) == report['iterates'] + 1
        assert json.loads((out / 'shift_orbit.json').read_text()) == report

    def test_equiv(self, capsys, descriptors_dir):
        code, report = invoke(capsys, 'equiv', descriptors_dir / 'zseek.json', descriptors_dir / 'tape_block.json',
                              '-m', 6)
        assert code == 0
        assert report['agreement']


@pytest.mark.integration
class TestFlowCommands:
    """disk-map, suspend, return-map and gauge."""

    def test_disk_map(self, capsys, descriptors_dir, tmp_path):
        code, report = invoke(capsys, 'disk-map', descriptors_dir / 'rotation.json', '--seeds', 8,
                              '--tol', 1e-11, '--out', tmp_path)
        assert code == 0
        assert report['passed']
        assert report['integrator'] == {'rtol': 1e-11, 'atol': 1e-11}
        assert len(pd.read_csv(tmp_path / 'disk_map.csv')) == 8

    def test_suspend(self, capsys, descriptors_dir):
        code, report = invoke(capsys, 'suspend', descriptors_dir / 'shear.json', '--samples', 200)
        assert code == 0
        assert report['validation']['d_beta_max'] < 1e-10

    def test_return_map(self, capsys, descriptors_dir, tmp_path):
        code, report = invoke(capsys, 'return-map', descriptors_dir / 'rotation.json', '--seeds', 3,
                              '--samples', 100, '--out', tmp_path)
        assert code == 0
        assert report['max_residual'] <= report['tolerance']
        assert (tmp_path / 'trajectory.csv').exists()
        assert list(pd.read_csv(tmp_path / 'return_map.csv').columns)[-1] == 'error'

    def test_gauge(self, capsys, descriptors_dir):
        code, report = invoke(capsys, 'gauge', descriptors_dir / 'gauge.json', '--samples', 500)
        assert code == 0
        assert report['det_min'] > 0

    def test_gauge_defaults(self, capsys):
        code, report = invoke(capsys, 'gauge', '--samples', 200, '--seed', 4)
        assert code == 0
        assert report['descriptor']['epsilon'] == 0.01


@pytest.mark.integration
@pytest.mark.slow
class TestBuildAndVerify:
    """Glued structures through the CLI."""

    def test_verify_unknown_check(self, capsys, descriptors_dir):
        code, report = invoke(capsys, 'verify', descriptors_dir / 'build_rotation.json', 'energy')
        assert code == 1
        assert report['error'] == 'UsageError'

    def test_verify_descriptor_file(self, capsys, descriptors_dir, tmp_path):
        code, report = invoke(capsys, 'verify', descriptors_dir / 'build_rotation.json', 'locality',
                              '--samples', 300, '--cache-dir', tmp_path)
        assert code == 0
        assert report['checks'][0]['name'] == 'locality'

    def test_unknown_reference(self, capsys, tmp_path):
        code, report = invoke(capsys, 'verify', 'deadbeefdeadbeef', 'locality', '--cache-dir', tmp_path)
        assert code == 1
        assert report['error'] == 'InputFileError'

    def test_build_then_verify_by_key(self, capsys, descriptors_dir, tmp_path):
        out, cache = tmp_path / 'out', tmp_path / 'cache'
        code, report = invoke(capsys, 'build', descriptors_dir / 'build_rotation.json', '--samples', 200,
                              '--seeds', 4, '--out', out, '--cache-dir', cache)
        assert code == 0, [c for c in report['checks'] if not c['passed']]
        assert {c['name'] for c in report['checks']} >= {'cosymplectic', 'ns[nu=0]', 'ns[nu=1]', 'return-map'}
        for name in ('beta_tilde', 'g_tilde', 'X_tilde', 'pressure'):
            assert (out / f'grid_{name}.csv').exists()

        code, verified = invoke(capsys, 'verify', report['structure_key'], 'ns', '--nu', 0.5,
                                '--samples', 200, '--cache-dir', cache)
        assert code == 0
        assert [c['name'] for c in verified['checks']] == ['ns[nu=0.5]']

    def test_build_without_cache(self, capsys, descriptors_dir, tmp_path, monkeypatch):
        monkeypatch.setenv('TURINGFLOW_CACHE_ENABLED', 'false')
        cache = tmp_path / 'cache'
        code, report = invoke(capsys, 'build', descriptors_dir / 'build_rotation.json', '--samples', 200,
                              '--seeds', 4, '--cache-dir', cache)
        assert code == 0
        assert not report['stored']
        assert not cache.exists()

        code, missing = invoke(capsys, 'verify', report['structure_key'], 'locality', '--cache-dir', cache)
        assert code == 1
        assert missing['error'] == 'InputFileError'
