"""
Timing utilities for solver runs and analyses.
"""

import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from typing import Any, Dict, Optional

from src.utils.logging_config import get_logger

logger = get_logger(__name__)


class PerformanceMonitor:
    """Aggregates wall-clock timings per named operation."""

    def __init__(self):
        self.operation_stats: Dict[str, Dict[str, Any]] = defaultdict(
            lambda: {
                "count": 0,
                "total_time": 0.0,
                "min_time": float("inf"),
                "max_time": 0.0,
                "errors": 0,
            }
        )
        self._lock = threading.Lock()

    def record_timing(self, operation: str, duration_ms: float, success: bool = True):
        """Fold one timing into the statistics of ``operation``."""
        with self._lock:
            stats = self.operation_stats[operation]
            stats["count"] += 1
            stats["total_time"] += duration_ms
            stats["min_time"] = min(stats["min_time"], duration_ms)
            stats["max_time"] = max(stats["max_time"], duration_ms)
            if not success:
                stats["errors"] += 1

    @contextmanager
    def time_operation(self, operation: str):
        """Context manager for timing operations."""
        start = time.perf_counter()
        success = True
        try:
            yield
        except Exception:
            success = False
            raise
        finally:
            duration_ms = (time.perf_counter() - start) * 1000
            self.record_timing(operation, duration_ms, success)
            logger.debug(f"{operation} took {duration_ms:.1f}ms")

    def get_operation_stats(self, operation: Optional[str] = None) -> Dict[str, Any]:
        """Get statistics for one operation or all of them."""
        with self._lock:
            if operation:
                stats = dict(self.operation_stats.get(operation, {}))
                if stats.get("count", 0) > 0:
                    stats["avg_time"] = stats["total_time"] / stats["count"]
                return stats
            result = {}
            for op, stats in self.operation_stats.items():
                if stats["count"] > 0:
                    stats_copy = dict(stats)
                    stats_copy["avg_time"] = stats["total_time"] / stats["count"]
                    result[op] = stats_copy
            return result

    def clear(self):
        """Clear all stored timings."""
        with self._lock:
            self.operation_stats.clear()


# Global performance monitor instance
performance_monitor = PerformanceMonitor()
