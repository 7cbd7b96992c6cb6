"""Shrinking harmonic-map trajectories with known concentration scales."""

from typing import Callable, Sequence

import numpy as np

from src.grid.radial_grid import RadialField, RadialGrid
from src.solvers.director import FieldState, Trajectory
from src.utils.logging_config import get_logger
from src.utils.validators import ConfigurationError

logger = get_logger(__name__)

SCHEDULE_STEP = 1e-6


def _schedule_rate(schedule: Callable[[float], float], time: float) -> float:
    step = SCHEDULE_STEP * max(1.0, abs(time))
    return (schedule(time + step) - schedule(time - step)) / (2.0 * step)


def synth_selfsimilar(
    lambda_schedule: Callable[[float], float],
    grid: RadialGrid,
    times: Sequence[float],
    k: int = 1,
) -> Trajectory:
    """phi(r, t) = 2 arctan((r/lambda(t))^k) with v = h = 0."""
    times = np.asarray(times, dtype=float)
    if times.size == 0 or np.any(np.diff(times) <= 0):
        raise ConfigurationError("synthetic times must be non-empty and increasing")
    scales = np.array([float(lambda_schedule(t)) for t in times])
    if np.any(~np.isfinite(scales)) or np.any(scales <= 0):
        raise ConfigurationError("lambda(t) must stay positive")
    if np.any(np.diff(scales) > 1e-12 * scales[:-1]):
        raise ConfigurationError("lambda(t) must be non-increasing")

    r = grid.nodes
    zeros = RadialField.zeros(grid)
    snapshots = []
    for t, lam in zip(times, scales):
        x = (r / lam) ** k
        phi = 2.0 * np.arctan(x)
        # d phi / d lambda = -2 k x / (lambda (1 + x^2))
        phi_t = -2.0 * k * x / (lam * (1.0 + x * x)) * _schedule_rate(lambda_schedule, t)
        phi_field = RadialField(grid, phi)
        snapshots.append(
            FieldState(
                grid=grid,
                phi=phi_field,
                phi_t=RadialField(grid, phi_t),
                v=zeros,
                h=zeros,
                time=float(t),
                phi_prev=phi_field,
            )
        )
    logger.info(
        f"Synthetic trajectory: {times.size} snapshots, lambda from {scales[0]:.4g} "
        f"to {scales[-1]:.4g}"
    )
    return Trajectory(grid=grid, snapshots=snapshots, k=k, synthetic=True)
