"""
Stage timings for catmod

Every decorated pipeline stage (vector loading, similarity, k-NN, greedy
communities, downstream tasks) records its wall time here, failed calls
included. Sweep workers share one registry.
"""

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass
from functools import wraps
from threading import Lock
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)

# Samples kept per stage; a long sweep calls the same stages thousands of times
MAX_SAMPLES = 1000


@dataclass(frozen=True)
class StageSample:
    seconds: float
    failed: bool = False


class PerformanceManager:
    """Thread-safe registry of stage timings"""

    def __init__(self, max_samples: int = MAX_SAMPLES):
        self.max_samples = max_samples
        self._samples: Dict[str, List[StageSample]] = {}
        self._lock = Lock()

    def record_timing(self, stage: str, seconds: float, failed: bool = False):
        with self._lock:
            samples = self._samples.setdefault(stage, [])
            samples.append(StageSample(seconds, failed))
            if len(samples) > self.max_samples:
                del samples[:len(samples) - self.max_samples]

    @contextmanager
    def time_operation(self, stage: str):
        """
        Time a block as one call of `stage`

        Usage:
            with perf.time_operation('bli_fit'):
                ...
        """
        start = time.perf_counter()
        failed = True
        try:
            yield
            failed = False
        finally:
            self.record_timing(stage, time.perf_counter() - start, failed)

    def get_timing_stats(self, stage: Optional[str] = None) -> Dict[str, Any]:
        """Per stage: count, failures, total/avg/min/max in milliseconds"""
        with self._lock:
            if stage is not None:
                samples = self._samples.get(stage)
                return _summarize(samples) if samples else {}
            return {name: _summarize(samples) for name, samples in self._samples.items() if samples}

    def log_summary(self):
        stats = self.get_timing_stats()
        if not stats:
            return
        for stage, summary in sorted(stats.items(), key=lambda item: -item[1]['total_ms']):
            failures = f", {summary['failures']} failed" if summary['failures'] else ""
            logger.info(f"{stage}: {summary['count']} call(s){failures}, total {summary['total_ms']:.1f} ms, "
                        f"mean {summary['avg_ms']:.1f} ms")

    def reset(self):
        with self._lock:
            self._samples.clear()


def _summarize(samples: List[StageSample]) -> Dict[str, Any]:
    seconds = [sample.seconds for sample in samples]
    return {
        'count': len(samples),
        'failures': sum(1 for sample in samples if sample.failed),
        'total_ms': sum(seconds) * 1000,
        'avg_ms': sum(seconds) / len(seconds) * 1000,
        'min_ms': min(seconds) * 1000,
        'max_ms': max(seconds) * 1000,
    }


def performance_monitor(stage: Optional[str] = None):
    """Decorator timing every call of a pipeline stage (defaults to the function name)"""
    def decorator(func):
        name = stage or func.__name__

        @wraps(func)
        def wrapper(*args, **kwargs):
            with get_performance_manager().time_operation(name):
                return func(*args, **kwargs)

        return wrapper
    return decorator


_registry: Optional[PerformanceManager] = None
_registry_lock = Lock()


def get_performance_manager() -> PerformanceManager:
    """Process-wide registry"""
    global _registry
    if _registry is None:
        with _registry_lock:
            if _registry is None:
                _registry = PerformanceManager()
    return _registry
