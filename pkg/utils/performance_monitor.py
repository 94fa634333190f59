# utils/performance_monitor.py
"""
Stage timing for CLI runs
"""

import time
import logging
from typing import Dict
from contextlib import contextmanager

logger = logging.getLogger(__name__)


class RunPerformanceMonitor:
    """
    Times named stages of one command and counts evaluated points
    """

    def __init__(self, command: str):
        self.command = command
        self.timings: Dict[str, float] = {}
        self.counters: Dict[str, int] = {}
        self.start_time = time.perf_counter()

    @contextmanager
    def time_operation(self, operation_name: str):
        """Context manager to time a stage; repeated stages accumulate"""
        start = time.perf_counter()
        try:
            yield
        finally:
            duration = time.perf_counter() - start
            self.timings[operation_name] = self.timings.get(operation_name, 0.0) + duration
            logger.debug(f"{operation_name} completed in {duration:.3f}s")

    def count_operation(self, operation_name: str, count: int = 1):
        self.counters[operation_name] = self.counters.get(operation_name, 0) + count

    def get_performance_summary(self) -> Dict:
        total = time.perf_counter() - self.start_time
        rates = {
            name: count / total for name, count in self.counters.items()
        } if total > 0 else {}
        return {
            'command': self.command,
            'total_duration_seconds': total,
            'operation_timings': dict(self.timings),
            'operation_counts': dict(self.counters),
            'operations_per_second': rates,
        }

    def log_summary(self):
        """Log the summary at INFO level"""
        summary = self.get_performance_summary()
        logger.info(f"{self.command} finished in {summary['total_duration_seconds']:.3f}s")
        for op, duration in summary['operation_timings'].items():
            logger.info(f"  - {op}: {duration:.3f}s")
        for op, count in summary['operation_counts'].items():
            logger.info(f"  - {op}: {count}")
