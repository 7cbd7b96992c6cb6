"""
Utilities package for the els toolkit.
Logging setup, error types and timing helpers.
"""

from .logging_config import get_logger
from .performance import PerformanceMonitor, performance_monitor
from .validators import (
    ComparisonError,
    ConfigurationError,
    ContractViolationError,
    DivergenceError,
    FitDegenerateError,
    RangeError,
    ResolutionError,
    ValidationError,
    ValidationResult,
)

__all__ = [
    "get_logger",
    "PerformanceMonitor",
    "performance_monitor",
    "ValidationError",
    "ValidationResult",
    "ConfigurationError",
    "ContractViolationError",
    "RangeError",
    "DivergenceError",
    "ComparisonError",
    "ResolutionError",
    "FitDegenerateError",
]
