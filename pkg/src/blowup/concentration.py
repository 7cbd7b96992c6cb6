"""
Concentration-radius selection and blowup-time flagging.

Energy levels here are directional: D(R, t) = 2 E(R, t), so a harmonic
bubble concentrates D = 4.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from src.solvers.director import FieldState, Trajectory
from src.solvers.functionals import local_energy_density
from src.utils.logging_config import get_logger
from src.utils.validators import ConfigurationError

logger = get_logger(__name__)

DEFAULT_EPSILON0 = 1.0
DEFAULT_EPSILON1 = 0.25
DEFAULT_CANDIDATES = 5
# test balls never shrink below this many cells
BALL_FLOOR_CELLS = 4
# the selected R is the radius of the inner sixth of the test ball
SELECTION_FACTOR = 6.0


@dataclass(frozen=True, eq=False)
class ConcentrationCandidate:
    """Snapshot times T_i before the flagged time t0 with their radii R_i."""

    t0: float
    times: np.ndarray
    radii: np.ndarray
    epsilon0: float
    epsilon1: float
    ball_radius: float
    resolution_limited: bool

    @property
    def ratios(self) -> np.ndarray:
        """R_i / (t0 - T_i)."""
        return self.radii / (self.t0 - self.times)

    def __len__(self) -> int:
        return int(self.times.size)


def directional_density(state: FieldState, k: int = 1) -> np.ndarray:
    return 2.0 * local_energy_density(state.grid, state.phi.values, state.phi_t.values, k)


def directional_energy(state: FieldState, radius: float, k: int = 1) -> float:
    """D(radius, t) with the piecewise-linear integrand of ``integral_to``."""
    grid = state.grid
    return float(grid.integral_to(directional_density(state, k), min(radius, grid.r_max))[0])


def select_concentration_radius(
    state: FieldState, epsilon1: float, k: int = 1
) -> Optional[float]:
    """Smallest R with D(6R, t) = epsilon1, or None when the total is below epsilon1."""
    if epsilon1 <= 0:
        raise ConfigurationError(f"epsilon1 must be positive, got {epsilon1}")
    grid = state.grid
    density = directional_density(state, k)
    cumulative = grid.cumulative_trapezoid(density)
    if cumulative[-1] < epsilon1:
        return None

    j = int(np.argmax(cumulative >= epsilon1))
    if cumulative[j] == epsilon1:
        return float(grid.nodes[j]) / SELECTION_FACTOR

    def excess(radius: float) -> float:
        return float(grid.integral_to(density, radius)[0]) - epsilon1

    # D is non-decreasing in R, so the level is crossed inside cell j-1
    rho = brentq(excess, grid.nodes[j - 1], grid.nodes[j], xtol=1e-14 * grid.r_max, rtol=1e-14)
    return float(rho) / SELECTION_FACTOR


def detect_blowup(
    traj: Trajectory,
    epsilon0: float = DEFAULT_EPSILON0,
    epsilon1: float = DEFAULT_EPSILON1,
    n_candidates: int = DEFAULT_CANDIDATES,
    k: Optional[int] = None,
) -> Optional[ConcentrationCandidate]:
    """Flag the first snapshot where D(max(6R, 4 dr), t) >= epsilon0.

    The candidate keeps the last ``n_candidates`` earlier snapshots with
    6 R_i < t0 - T_i.
    """
    if not 3.0 * epsilon1 < epsilon0:
        raise ConfigurationError(
            f"blowup levels need 3*epsilon1 < epsilon0, got epsilon0={epsilon0}, "
            f"epsilon1={epsilon1}",
            details={"epsilon0": epsilon0, "epsilon1": epsilon1},
        )
    k = traj.k if k is None else k
    grid = traj.grid
    floor = BALL_FLOOR_CELLS * grid.dr

    radii = []
    flagged = None
    ball = None
    for index, state in enumerate(traj.snapshots):
        R = select_concentration_radius(state, epsilon1, k)
        radii.append(R)
        if R is None:
            continue
        ball = max(SELECTION_FACTOR * R, floor)
        if directional_energy(state, ball, k) >= epsilon0:
            flagged = index
            break

    if flagged is None:
        logger.info("No energy concentration detected")
        return None

    t0 = float(traj.snapshots[flagged].time)
    resolution_limited = bool(ball <= floor)
    if resolution_limited:
        logger.warning(
            f"Concentration at t0={t0:.6g} is resolved only at the {floor:.3g} ball floor"
        )

    times, kept = [], []
    for index in range(flagged):
        R = radii[index]
        T_i = float(traj.snapshots[index].time)
        if R is not None and SELECTION_FACTOR * R < t0 - T_i:
            times.append(T_i)
            kept.append(R)
    if not times:
        logger.warning(f"Concentration flagged at t0={t0:.6g} but no earlier candidate qualifies")
        return None

    candidate = ConcentrationCandidate(
        t0=t0,
        times=np.asarray(times[-n_candidates:]),
        radii=np.asarray(kept[-n_candidates:]),
        epsilon0=epsilon0,
        epsilon1=epsilon1,
        ball_radius=float(ball),
        resolution_limited=resolution_limited,
    )
    logger.info(f"Blowup candidate: t0={t0:.6g} with {len(candidate)} concentration times")
    return candidate
