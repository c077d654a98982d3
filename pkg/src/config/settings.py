"""
Environment-driven runtime settings.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from config.constants import INTEGRATOR_DEFAULTS, SAMPLE_COUNTS


def _env(name: str, default: str) -> str:
    return os.getenv(f'TURINGFLOW_{name}', default)


@dataclass
class LoggingConfig:
    """Logging configuration."""
    log_level: str = field(default_factory=lambda: _env('LOG_LEVEL', 'WARNING').upper())
    log_format: str = field(default_factory=lambda: _env('LOG_FORMAT', 'json'))
    log_file: Optional[str] = field(default_factory=lambda: os.getenv('TURINGFLOW_LOG_FILE'))


@dataclass
class CacheConfig:
    """Structure store configuration."""
    cache_enabled: bool = field(default_factory=lambda: _env('CACHE_ENABLED', 'True').lower() == 'true')
    cache_dir: str = field(default_factory=lambda: _env('CACHE_DIR', str(Path.home() / '.cache' / 'turingflow')))
    cache_ttl_default: int = field(default_factory=lambda: int(_env('CACHE_TTL', str(7 * 24 * 3600))))


@dataclass
class SamplingConfig:
    """Sample counts and integrator tolerances used when no override is given."""
    seed: int = field(default_factory=lambda: int(_env('SEED', '20240601')))
    first_order_samples: int = field(
        default_factory=lambda: int(_env('FIRST_ORDER_SAMPLES', str(SAMPLE_COUNTS['first_order']))))
    second_order_samples: int = field(
        default_factory=lambda: int(_env('SECOND_ORDER_SAMPLES', str(SAMPLE_COUNTS['second_order']))))
    seeds: int = field(default_factory=lambda: int(_env('RETURN_SEEDS', str(SAMPLE_COUNTS['seeds']))))
    rtol: float = field(default_factory=lambda: float(_env('RTOL', str(INTEGRATOR_DEFAULTS['rtol']))))
    atol: float = field(default_factory=lambda: float(_env('ATOL', str(INTEGRATOR_DEFAULTS['atol']))))

    def __post_init__(self):
        errors = []
        if self.first_order_samples <= 0 or self.second_order_samples <= 0 or self.seeds <= 0:
            errors.append("Sample counts must be positive")
        if self.rtol <= 0 or self.atol <= 0:
            errors.append("Integrator tolerances must be positive")
        if errors:
            raise ValueError(f"Sampling configuration validation failed: {'; '.join(errors)}")


@dataclass
class Settings:
    """Complete runtime configuration."""
    app_name: str = field(default_factory=lambda: _env('APP_NAME', 'turingflow'))
    app_version: str = field(default_factory=lambda: _env('APP_VERSION', '1.0.0'))

    logging: LoggingConfig = field(default_factory=LoggingConfig)
    cache: CacheConfig = field(default_factory=CacheConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            'app_name': self.app_name,
            'app_version': self.app_version,
            'logging': {
                'log_level': self.logging.log_level,
                'log_format': self.logging.log_format,
                'log_file': self.logging.log_file,
            },
            'cache': {
                'cache_enabled': self.cache.cache_enabled,
                'cache_dir': self.cache.cache_dir,
            },
            'sampling': {
                'seed': self.sampling.seed,
                'first_order_samples': self.sampling.first_order_samples,
                'second_order_samples': self.sampling.second_order_samples,
                'seeds': self.sampling.seeds,
                'rtol': self.sampling.rtol,
                'atol': self.sampling.atol,
            },
        }


def load_settings() -> Settings:
    """Read the environment again and return fresh settings."""
    return Settings()

