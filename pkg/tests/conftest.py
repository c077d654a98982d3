"""
Pytest configuration and fixtures for the TuringFlow tests.
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Add src directory to Python path
src_path = Path(__file__).parent.parent / "src"
sys.path.insert(0, str(src_path))

DESCRIPTORS = Path(__file__).parent.parent / "descriptors"


@pytest.fixture
def descriptors_dir():
    """Directory holding the sample machine, isotopy and build files."""
    return DESCRIPTORS


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def flip():
    from services.tm_core import flip_machine
    return flip_machine()


@pytest.fixture
def zseek():
    from services.tm_core import zseek_machine
    return zseek_machine()


@pytest.fixture
def bounce():
    from services.tm_core import bounce_machine
    return bounce_machine()


@pytest.fixture
def rotation():
    """Rotation isotopy on the unit disk, angle 1 on |p| < 0.4."""
    from services.suspension import rotation_isotopy
    return rotation_isotopy(1.0, 0.4, 0.8)


@pytest.fixture
def shear():
    from services.suspension import shear_isotopy
    return shear_isotopy(0.5, 0.4, 0.8)


@pytest.fixture
def small_context():
    """Sample counts small enough for unit tests."""
    from monitoring.checks import CheckContext
    return CheckContext(seed=7, first_order_samples=400, second_order_samples=40, positivity_samples=2000,
                        outside_samples=200, seeds=6)


@pytest.fixture(scope="session")
def glued_rotation():
    """Default nested tori with the rotation isotopy glued in (built once per session)."""
    from services.gluing import NestedTori, glue
    from services.suspension import rotation_isotopy
    return glue(rotation_isotopy(1.0, 0.4, 0.8), NestedTori(), 1.0, n_samples=5000, seed=3)


@pytest.fixture(scope="session")
def glued_trivial():
    """Default nested tori with the zero isotopy: only the collar deformation remains."""
    from services.gluing import NestedTori, glue
    from services.suspension import zero_isotopy
    return glue(zero_isotopy(), NestedTori(), 1.0, n_samples=5000, seed=4)


@pytest.fixture
def store(tmp_path):
    """Structure store in a throwaway directory."""
    from utils.structure_store import StructureStore
    s = StructureStore(cache_dir=str(tmp_path / "store"))
    yield s
    s.close()


@pytest.fixture
def performance_monitor():
    """Performance monitor instance for testing."""
    from utils.performance_monitor import get_performance_monitor
    return get_performance_monitor()


@pytest.fixture(autouse=True)
def reset_environment():
    """Reset environment variables and state before each test."""
    # Store original environment
    original_env = dict(os.environ)

    yield

    # Restore original environment
    os.environ.clear()
    os.environ.update(original_env)
