"""Structured logging with run IDs and performance markers."""

import functools
import logging
import sys
import time
import uuid
from typing import Any, Dict, Optional

import structlog

from config.settings import load_settings

# One id per process so that every line of a CLI invocation can be correlated.
RUN_ID = uuid.uuid4().hex[:8]

_configured = False


class RunIDProcessor:
    """Add the process run id to log entries."""

    def __call__(self, logger, method_name, event_dict):
        event_dict['run_id'] = RUN_ID
        return event_dict


class TimestampProcessor:
    """Add high-precision timestamps to log entries."""

    def __call__(self, logger, method_name, event_dict):
        event_dict['timestamp'] = time.time()
        return event_dict


class PerformanceProcessor:
    """Flag slow numerical operations."""

    def __call__(self, logger, method_name, event_dict):
        duration = event_dict.get('duration')
        if duration is not None:
            if duration > 60.0:
                event_dict['performance_alert'] = 'very_slow_operation'
            elif duration > 5.0:
                event_dict['performance_alert'] = 'slow_operation'
        return event_dict


def configure_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """Configure structlog and the stdlib root handlers once per process."""
    global _configured
    config = load_settings().logging
    level_name = (level or config.log_level).upper()
    log_file = log_file or config.log_file

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, level_name, logging.WARNING),
        handlers=handlers,
        format='%(message)s',  # structlog handles formatting
        force=True,
    )

    renderer = (structlog.processors.JSONRenderer(sort_keys=True)
                if config.log_format == 'json' else structlog.dev.ConsoleRenderer(colors=False))
    structlog.configure(
        processors=[
            RunIDProcessor(),
            TimestampProcessor(),
            PerformanceProcessor(),
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )
    _configured = True


class EnhancedLogger:
    """Thin wrapper binding a module name to a structlog logger."""

    def __init__(self, name: str):
        if not _configured:
            configure_logging()
        self.name = name
        self.logger = structlog.get_logger(name)

    def debug(self, message: str, **kwargs):
        self.logger.debug(message, **kwargs)

    def info(self, message: str, **kwargs):
        self.logger.info(message, **kwargs)

    def warning(self, message: str, **kwargs):
        self.logger.warning(message, **kwargs)

    def error(self, message: str, **kwargs):
        self.logger.error(message, **kwargs)

    def performance_event(self, message: str, duration: float, operation: str, **kwargs):
        """Log a timed operation; slow ones are promoted to warnings."""
        kwargs.update({
            'performance_event': True,
            'duration': duration,
            'operation': operation,
        })
        if duration > 60.0:
            self.warning(message, **kwargs)
        else:
            self.info(message, **kwargs)

    def check_event(self, name: str, passed: bool, max_residual: float, tolerance: float, **kwargs):
        """Log the outcome of a verification check."""
        log = self.info if passed else self.warning
        log(f"Check {name}: {'pass' if passed else 'fail'}",
            check=name, passed=passed, max_residual=max_residual, tolerance=tolerance, **kwargs)

    def run_event(self, subcommand: str, details: Dict[str, Any]):
        """Log a CLI invocation for the audit trail."""
        self.info(f"Command: {subcommand}", subcommand=subcommand, **details)


@functools.lru_cache(maxsize=None)
def get_enhanced_logger(name: str) -> EnhancedLogger:
    """Get enhanced logger instance."""
    return EnhancedLogger(name)


def log_performance(operation_name: str):
    """Decorator to log duration and failures of an operation."""
    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            logger = get_enhanced_logger(func.__module__)
            start_time = time.perf_counter()
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                logger.error(
                    f"Operation failed: {operation_name}",
                    duration=time.perf_counter() - start_time,
                    operation=operation_name,
                    function=func.__name__,
                    error=str(e),
                    error_type=type(e).__name__,
                )
                raise
            logger.performance_event(
                f"Operation completed: {operation_name}",
                duration=time.perf_counter() - start_time,
                operation=operation_name,
                function=func.__name__,
            )
            return result
        return wrapper
    return decorator
