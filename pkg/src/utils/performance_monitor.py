"""Operation timing and process memory tracking for log output."""

import threading
import time
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import psutil

from utils.logger import get_enhanced_logger

logger = get_enhanced_logger(__name__)


@dataclass
class PerformanceMetric:
    """Individual performance metric."""
    name: str
    value: float
    timestamp: float
    labels: Dict[str, str] = field(default_factory=dict)


class PerformanceBuffer:
    """Circular buffer for performance metrics."""

    def __init__(self, max_size: int = 1000):
        self.max_size = max_size
        self.buffer = deque(maxlen=max_size)
        self.lock = threading.Lock()

    def add_metric(self, metric: PerformanceMetric):
        with self.lock:
            self.buffer.append(metric)

    def get_metrics(self, metric_name: Optional[str] = None) -> List[PerformanceMetric]:
        with self.lock:
            metrics = list(self.buffer)
        if metric_name:
            metrics = [m for m in metrics if m.name == metric_name]
        return metrics

    def get_summary(self, metric_name: str) -> Dict[str, float]:
        """Count, min, max and mean of one metric."""
        values = [m.value for m in self.get_metrics(metric_name)]
        if not values:
            return {}
        return {
            'count': len(values),
            'min': min(values),
            'max': max(values),
            'avg': sum(values) / len(values),
        }


class PerformanceMonitor:
    """Times pipeline stages and samples process memory.

    Nothing recorded here is written into reports; it only feeds the log.
    """

    def __init__(self):
        self.process = psutil.Process()
        self.buffer = PerformanceBuffer()

    def memory_mb(self) -> float:
        return self.process.memory_info().rss / 1024 / 1024

    @contextmanager
    def track(self, operation: str, **labels):
        """Context manager recording duration and memory growth of a block."""
        start = time.perf_counter()
        mem_before = self.memory_mb()
        try:
            yield
        finally:
            duration = time.perf_counter() - start
            mem_delta = self.memory_mb() - mem_before
            str_labels = {k: str(v) for k, v in labels.items()}
            now = time.time()
            self.buffer.add_metric(PerformanceMetric(f'{operation}.duration', duration, now, str_labels))
            self.buffer.add_metric(PerformanceMetric(f'{operation}.memory_delta_mb', mem_delta, now, str_labels))
            logger.performance_event(
                f"Stage finished: {operation}",
                duration=duration,
                operation=operation,
                memory_delta_mb=round(mem_delta, 3),
                **labels,
            )

    def summary(self) -> Dict[str, Any]:
        names = sorted({m.name for m in self.buffer.get_metrics()})
        return {name: self.buffer.get_summary(name) for name in names}


_monitor: Optional[PerformanceMonitor] = None


def get_performance_monitor() -> PerformanceMonitor:
    """Process-wide monitor instance."""
    global _monitor
    if _monitor is None:
        _monitor = PerformanceMonitor()
    return _monitor
