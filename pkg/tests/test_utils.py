"""
Tests for configuration, errors, descriptor loading, exports, the structure store and monitoring.
"""

import json
import time
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from config.settings import Settings, load_settings
from models.flow_models import IsotopyDescriptor
from models.machine_models import MachineFile
from services.shift_encoding import SquarePoint
from utils.errors import BadRadii, GluingError, InputFileError, NoCylinder, TuringFlowError
from utils.export import (disk_map_frame, dumps, orbit_frame, return_map_frame, trajectory_frame, write_csv,
                          write_json)
from utils.logger import RUN_ID, PerformanceProcessor, RunIDProcessor, get_enhanced_logger, log_performance
from utils.performance_monitor import PerformanceBuffer, PerformanceMetric
from utils.structure_store import StructureStore, content_key
from utils.validators import FileValidator, load_model


@pytest.mark.unit
class TestSettings:
    """Environment-driven settings."""

    def test_defaults(self):
        settings = Settings()
        assert settings.app_name == 'turingflow'
        assert settings.sampling.rtol > 0

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv('TURINGFLOW_SEED', '99')
        monkeypatch.setenv('TURINGFLOW_LOG_LEVEL', 'debug')
        settings = load_settings()
        assert settings.sampling.seed == 99
        assert settings.logging.log_level == 'DEBUG'
        assert settings.to_dict()['sampling']['seed'] == 99

    def test_each_load_reads_the_environment(self, monkeypatch):
        monkeypatch.delenv('TURINGFLOW_CACHE_ENABLED', raising=False)
        assert load_settings().cache.cache_enabled
        monkeypatch.setenv('TURINGFLOW_CACHE_ENABLED', 'false')
        assert not load_settings().cache.cache_enabled

    def test_invalid_tolerance(self, monkeypatch):
        monkeypatch.setenv('TURINGFLOW_RTOL', '-1')
        with pytest.raises(ValueError):
            load_settings()


@pytest.mark.unit
class TestErrors:
    """Error hierarchy and serialization."""

    def test_to_dict(self):
        error = NoCylinder("no cylinder", {'x': '1/4'})
        assert error.to_dict() == {'error': 'NoCylinder', 'message': 'no cylinder', 'details': {'x': '1/4'}}

    def test_hierarchy(self):
        assert issubclass(BadRadii, GluingError)
        assert issubclass(InputFileError, TuringFlowError)
        assert TuringFlowError("plain").details == {}


@pytest.mark.unit
class TestDescriptorLoading:
    """File checks before parsing."""

    def test_load_machine(self, descriptors_dir):
        model = load_model(descriptors_dir / 'flip.json', MachineFile)
        assert model.q_halt == 'qh'

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFileError) as excinfo:
            load_model(tmp_path / 'absent.json', MachineFile)
        assert 'not found' in excinfo.value.message

    def test_empty_file(self, tmp_path):
        path = tmp_path / 'empty.json'
        path.write_text('')
        assert FileValidator().validate_file(path) == (False, "File is empty", None)

    def test_wrong_extension(self, tmp_path):
        path = tmp_path / 'machine.yaml'
        path.write_text('states: []')
        ok, error, _ = FileValidator().validate_file(path)
        assert not ok
        assert 'yaml' in error

    def test_file_too_large(self, tmp_path):
        path = tmp_path / 'big.json'
        path.write_text('{"ones": [' + ', '.join(['1'] * 100) + ']}')
        ok, error, _ = FileValidator(max_file_size=64).validate_file(path)
        assert not ok
        assert error.startswith('File too large')

    def test_schema_errors_are_listed(self, tmp_path):
        path = tmp_path / 'iso.json'
        path.write_text(json.dumps({'profile': 'rotation', 'r_a': 0.9}))
        with pytest.raises(InputFileError) as excinfo:
            load_model(path, IsotopyDescriptor)
        assert excinfo.value.details['errors']

    def test_file_info(self, descriptors_dir):
        ok, error, info = FileValidator().validate_file(descriptors_dir / 'gauge.json')
        assert ok and error is None
        assert info['extension'] == 'json'


@pytest.mark.unit
class TestExport:
    """JSON and CSV writers."""

    def test_dumps_is_canonical(self):
        text = dumps({'b': np.float64(0.5), 'a': np.arange(2), 'c': frozenset({3, 1})})
        assert text.endswith('\n')
        assert json.loads(text) == {'a': [0, 1], 'b': 0.5, 'c': [1, 3]}
        assert text.index('"a"') < text.index('"b"')

    def test_dumps_rejects_unknown_objects(self):
        with pytest.raises(TypeError):
            dumps({'x': object()})

    def test_write_json_creates_parents(self, tmp_path):
        path = write_json(tmp_path / 'out' / 'report.json', {'passed': True})
        assert json.loads(path.read_text()) == {'passed': True}

    def test_orbit_frame_is_exact(self):
        frame = orbit_frame([SquarePoint(Fraction(1, 6), Fraction(1, 3))])
        assert frame.iloc[0].tolist() == [0, 1, 6, 1, 3]

    def test_csv_round_trip_precision(self, tmp_path):
        frame = trajectory_frame(np.array([[0.0, 0.1, 1.0 / 3.0, 0.25]]))
        path = write_csv(frame, tmp_path / 'traj.csv')
        assert pd.read_csv(path, float_precision='round_trip')['y'][0] == 1.0 / 3.0

    def test_map_frames(self):
        seeds = np.array([[0.1, 0.2], [0.3, 0.4]])
        assert list(disk_map_frame(seeds, seeds, np.ones(2)).columns) == ['x', 'y', 'fx', 'fy', 'det']
        frame = return_map_frame(seeds, seeds + 1e-3, np.ones(2), expected=seeds)
        assert np.allclose(frame['error'], np.sqrt(2) * 1e-3)


@pytest.mark.unit
class TestStructureStore:
    """Two-level descriptor store."""

    def test_put_get(self, store):
        key = store.put({'c': 1.0, 'seed': 0})
        assert key == content_key({'seed': 0, 'c': 1.0})
        assert store.get(key) == {'c': 1.0, 'seed': 0}
        assert store.get_stats()['memory_hits'] == 1

    def test_disk_fallback(self, store):
        key = store.put({'c': 2.0})
        store.memory_cache.clear()
        assert store.get(key) == {'c': 2.0}
        assert store.get_stats()['disk_hits'] == 1

    def test_missing_key(self, store):
        assert store.get('0' * 16) is None
        assert store.get_stats()['misses'] == 1

    def test_delete_and_clear(self, store):
        key = store.put({'c': 3.0})
        assert store.delete(key)
        assert store.get(key) is None
        store.put({'c': 4.0})
        store.clear()
        assert store.get_stats()['memory_size'] == 0

    def test_expired_entries(self, tmp_path):
        store = StructureStore(cache_dir=str(tmp_path / 'short'), ttl=0)
        try:
            key = store.put({'c': 5.0})
            time.sleep(0.01)
            assert store.get(key) is None
        finally:
            store.close()


@pytest.mark.unit
class TestMonitoring:
    """Logging processors and stage timing."""

    def test_track_records_duration(self, performance_monitor):
        with performance_monitor.track('unit_stage', samples=3):
            sum(range(1000))
        summary = performance_monitor.summary()
        assert summary['unit_stage.duration']['count'] >= 1
        assert 'unit_stage.memory_delta_mb' in summary

    def test_buffer_is_bounded(self):
        buffer = PerformanceBuffer(max_size=3)
        for i in range(5):
            buffer.add_metric(PerformanceMetric('m', float(i), 0.0))
        assert buffer.get_summary('m') == {'count': 3, 'min': 2.0, 'max': 4.0, 'avg': 3.0}
        assert buffer.get_summary('absent') == {}

    def test_processors(self):
        assert RunIDProcessor()(None, 'info', {})['run_id'] == RUN_ID
        assert PerformanceProcessor()(None, 'info', {'duration': 10.0})['performance_alert'] == 'slow_operation'
        assert 'performance_alert' not in PerformanceProcessor()(None, 'info', {'duration': 0.1})

    def test_log_performance_reraises(self):
        @log_performance('failing')
        def fail():
            raise BadRadii("r0 >= rT")

        with pytest.raises(BadRadii):
            fail()

    def test_logger_is_cached(self):
        assert get_enhanced_logger('turingflow.test') is get_enhanced_logger('turingflow.test')
