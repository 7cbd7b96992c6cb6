"""Wave-scaling rescaling of snapshots and fits to the harmonic-map family."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from src.grid.radial_grid import AxisPolicy, RadialField, RadialGrid
from src.solvers.director import Trajectory
from src.utils.logging_config import get_logger
from src.utils.validators import FitDegenerateError, RangeError

logger = get_logger(__name__)

TRIVIAL_PROFILE = 0.1
SCAN_POINTS = 65
TIME_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ProfileFit:
    C_fit: float
    residual_l2: float
    fit_window: Tuple[float, float]
    harmonic_residual: float
    k: int = 1


def harmonic_family(r: np.ndarray, C: float, k: int = 1) -> np.ndarray:
    """2 arctan((r/C)^k)."""
    return 2.0 * np.arctan((np.asarray(r, dtype=float) / C) ** k)


def _values_at(traj: Trajectory, name: str, time: float) -> np.ndarray:
    times = traj.times
    if time < times[0] - TIME_TOLERANCE or time > times[-1] + TIME_TOLERANCE:
        raise RangeError(f"t={time} outside the stored times [{times[0]}, {times[-1]}]")
    index = int(np.clip(np.searchsorted(times, time, side="right") - 1, 0, len(times) - 1))
    here = getattr(traj.snapshots[index], name).values
    if abs(times[index] - time) <= TIME_TOLERANCE or index == len(times) - 1:
        return here
    there = getattr(traj.snapshots[index + 1], name).values
    weight = (time - times[index]) / (times[index + 1] - times[index])
    return (1.0 - weight) * here + weight * there


def rescale_profile(
    traj: Trajectory, R_i: float, T_i: float, comparison_grid: RadialGrid
) -> Tuple[RadialField, RadialField]:
    """phi_i(r) = phi(R_i r, T_i) and h_i(r) = h(R_i r, T_i) on the comparison grid."""
    if R_i <= 0:
        raise RangeError(f"scale must be positive, got {R_i}")
    source = traj.grid
    reach = R_i * comparison_grid.r_max
    if reach > source.r_max * (1.0 + 1e-12):
        raise RangeError(
            f"rescaled grid reaches r={reach:.6g} beyond r_max={source.r_max}",
            details={"R_i": R_i, "reach": reach},
        )
    radii = R_i * comparison_grid.nodes
    phi = source.interpolate(_values_at(traj, "phi", T_i), radii)
    h = source.interpolate(_values_at(traj, "h", T_i), radii)
    return RadialField(comparison_grid, phi), RadialField(comparison_grid, h)


def fit_harmonic_profile(
    profile: RadialField, window: Tuple[float, float], k: int = 1
) -> ProfileFit:
    """Least-squares C of 2 arctan((r/C)^k) on the window, golden section in log C."""
    grid = profile.grid
    r_lo, r_hi = window
    if not 0.0 <= r_lo < r_hi <= grid.r_max * (1.0 + 1e-12):
        raise RangeError(f"fit window {window} not inside [0, {grid.r_max}]")
    mask = (grid.nodes >= r_lo) & (grid.nodes <= r_hi)
    r = grid.nodes[mask]
    values = profile.values[mask]
    if np.max(np.abs(values)) <= TRIVIAL_PROFILE:
        raise FitDegenerateError(
            f"profile amplitude {np.max(np.abs(values)):.3g} on {window} is too small to fit"
        )
    weights = r * grid.dr

    def objective(log_c: float) -> float:
        misfit = values - harmonic_family(r, np.exp(log_c), k)
        return float(np.dot(weights, misfit * misfit))

    scan = np.linspace(np.log(grid.dr), np.log(grid.r_max), SCAN_POINTS)
    costs = np.array([objective(x) for x in scan])
    best = int(np.argmin(costs))
    lo, hi = scan[max(best - 1, 0)], scan[min(best + 1, SCAN_POINTS - 1)]
    if 0 < best < SCAN_POINTS - 1 and costs[best] < min(costs[best - 1], costs[best + 1]):
        result = minimize_scalar(
            objective, bracket=(lo, scan[best], hi), method="golden", tol=1e-12
        )
    else:
        result = minimize_scalar(
            objective, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
        )
    C_fit = float(np.exp(result.x))

    residual = grid.laplacian(profile.values, AxisPolicy.DIRICHLET_ZERO)
    interior = mask.copy()
    interior[0] = interior[-1] = False
    interior &= grid.nodes > r_lo
    interior &= grid.nodes < r_hi
    r_in = grid.nodes[interior]
    residual = residual[interior] - k * k * np.sin(2.0 * profile.values[interior]) / (
        2.0 * r_in * r_in
    )
    harmonic_residual = float(np.sqrt(np.dot(r_in * grid.dr, residual * residual)))

    fit = ProfileFit(
        C_fit=C_fit,
        residual_l2=float(np.sqrt(max(result.fun, 0.0))),
        fit_window=(float(r_lo), float(r_hi)),
        harmonic_residual=harmonic_residual,
        k=k,
    )
    logger.debug(f"Harmonic fit on {window}: C={C_fit:.6g}, residual={fit.residual_l2:.3e}")
    return fit
