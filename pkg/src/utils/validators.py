"""
Error types and check results for the els toolkit.
Every failure raised by the numerical modules derives from ValidationError.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


class ValidationError(Exception):
    """Base exception carrying a machine-readable code and details."""

    default_code = "VALIDATION"

    def __init__(
        self,
        message: str,
        code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.code = code or self.default_code
        self.details = details or {}


class ConfigurationError(ValidationError):
    """Invalid user or solver configuration."""

    default_code = "CONFIGURATION"


class ContractViolationError(ValidationError):
    """An operation was called on data violating its precondition."""

    default_code = "CONTRACT_VIOLATION"


class RangeError(ValidationError):
    """Radii, times or windows outside the available domain."""

    default_code = "RANGE"


class DivergenceError(ValidationError):
    """A field became non-finite or exceeded the divergence threshold."""

    default_code = "DIVERGENCE"

    def __init__(self, message: str, time: float, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details=details)
        self.time = time


class ComparisonError(ValidationError):
    """Two trajectories cannot be compared (grid or time mismatch)."""

    default_code = "COMPARISON"


class ResolutionError(ValidationError):
    """Snapshots are too sparse for the requested time integral."""

    default_code = "RESOLUTION"


class FitDegenerateError(ValidationError):
    """Profile carries no signal to fit."""

    default_code = "FIT_DEGENERATE"


@dataclass
class ValidationResult:
    """Result of one verification check."""

    valid: bool
    errors: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    details: Dict[str, Any] = field(default_factory=dict)

    def add_error(self, error: str, code: Optional[str] = None):
        """Add an error to the result."""
        self.valid = False
        self.errors.append(error)
        if code:
            self.details[f"error_code_{len(self.errors)}"] = code

    def add_warning(self, warning: str):
        """Add a warning to the result."""
        self.warnings.append(warning)


def check_bound(
    name: str, measured: float, limit: float, details: Optional[Dict[str, Any]] = None
) -> ValidationResult:
    """Pass when ``measured <= limit``; the measured slack is kept in details."""
    result = ValidationResult(valid=True, details={"check": name, **(details or {})})
    result.details["measured"] = float(measured)
    result.details["limit"] = float(limit)
    if not np.isfinite(measured) or measured > limit:
        result.add_error(f"{name}: measured {measured:.6g} exceeds {limit:.6g}", "BOUND")
    return result


def check_floor(
    name: str, measured: float, floor: float, details: Optional[Dict[str, Any]] = None
) -> ValidationResult:
    """Pass when ``measured >= floor``; convergence orders and error ratios."""
    result = ValidationResult(valid=True, details={"check": name, **(details or {})})
    result.details["measured"] = float(measured)
    result.details["limit"] = float(floor)
    if not np.isfinite(measured) or measured < floor:
        result.add_error(f"{name}: measured {measured:.6g} below {floor:.6g}", "BOUND")
    return result


def require_finite(values: np.ndarray, label: str) -> None:
    """Raise ContractViolationError when ``values`` holds NaN or Inf."""
    if not np.all(np.isfinite(values)):
        raise ContractViolationError(f"{label} contains non-finite values")
