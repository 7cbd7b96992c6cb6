"""
Energy diagnostics: local energy reports, the H(phi) bound, per-step
monotonicity of the scheme energies and the small-energy pi/2 bound.

Local energies carry the 1/2 of e = (phi_r^2 + phi_t^2 + sin^2(phi)/r^2)/2.
Threshold quantities (the bubble level 4, blowup levels) use the
directional energy 2*E.
"""

from dataclasses import dataclass
from typing import Dict, Union

import numpy as np

from config.settings import settings
from src.grid.radial_grid import RadialField
from src.solvers.director import FieldState, Formulation, Trajectory
from src.solvers.functionals import local_energy_density, wels_total, welss_total
from src.solvers.ginzburg_landau import GLTrajectory
from src.utils.logging_config import get_logger
from src.utils.validators import RangeError, ValidationResult, check_bound

logger = get_logger(__name__)

# bubble energy in the directional normalization
BUBBLE_THRESHOLD = 4.0
PI_HALF_TOLERANCE = 0.01
H_BOUND_TOLERANCE = 1e-8

DISSIPATED_FUNCTIONAL = {
    Formulation.H_FORM: "total_welss",
    Formulation.V_FORM: "total_wels",
}


@dataclass(frozen=True, eq=False)
class EnergyReport:
    """Local energy density and its cumulative profile at one time."""

    time: float
    e_field: RadialField
    cumulative: RadialField
    total_welss: float
    total_wels: float

    def E_of_R(self, radius: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """E(R, t) = integral of e r dr over [0, R]."""
        grid = self.e_field.grid
        radii = np.atleast_1d(np.asarray(radius, dtype=float))
        if np.any(radii < 0) or np.any(radii > grid.r_max * (1.0 + 1e-12)):
            raise RangeError(f"radius outside [0, {grid.r_max}]")
        out = grid.integral_to(self.e_field.values, np.minimum(radii, grid.r_max))
        return float(out[0]) if np.isscalar(radius) else out

    def directional_energy(self, radius: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        """D(R, t) = 2 E(R, t); a harmonic bubble carries D = 4."""
        return 2.0 * self.E_of_R(radius)

    @property
    def threshold_energy(self) -> float:
        return 2.0 * self.total_welss


def energy_report(state: FieldState, k: int = 1) -> EnergyReport:
    grid = state.grid
    phi, phi_t = state.phi.values, state.phi_t.values
    density = local_energy_density(grid, phi, phi_t, k)
    return EnergyReport(
        time=state.time,
        e_field=RadialField(grid, density),
        cumulative=RadialField(grid, grid.cumulative_trapezoid(density)),
        total_welss=welss_total(grid, phi, phi_t, state.h.values, k),
        total_wels=wels_total(grid, phi, phi_t, state.v.values, k),
    )


def staggered_local_energy(state: FieldState, k: int = 1) -> np.ndarray:
    """Local energy E(r_j) from half-node cell contributions.

    Each cell carries (dphi/dr)^2/2 + (mean |sin phi| / r)^2/2 at its midpoint,
    with the exact mean of |sin| along the linear segment, so that the
    increment of H(phi) over the cell is bounded by the cell energy.
    """
    grid = state.grid
    phi, phi_t = state.phi.values, state.phi_t.values
    dphi = np.diff(phi)
    dH = np.diff(H_of_phi(phi))
    with np.errstate(divide="ignore", invalid="ignore"):
        mean_sin = np.where(
            np.abs(dphi) > 1e-14,
            np.abs(dH / np.where(np.abs(dphi) > 1e-14, dphi, 1.0)),
            np.abs(np.sin(0.5 * (phi[1:] + phi[:-1]))),
        )
    r_half = grid.half_nodes
    kinetic = 0.25 * (phi_t[1:] ** 2 + phi_t[:-1] ** 2)
    cell = (
        0.5 * (dphi / grid.dr) ** 2 + 0.5 * k * k * (mean_sin / r_half) ** 2 + kinetic
    ) * r_half * grid.dr
    out = np.zeros(grid.size)
    out[1:] = np.cumsum(cell)
    return out


def H_of_phi(phi: np.ndarray) -> np.ndarray:
    """H(phi) = integral of |sin| over [0, phi]; odd, 2 per half period."""
    phi = np.asarray(phi, dtype=float)
    magnitude = np.abs(phi)
    periods = np.floor(magnitude / np.pi)
    value = 2.0 * periods + 1.0 - np.cos(magnitude - periods * np.pi)
    return np.sign(phi) * value


def h_bound_check(state: FieldState, k: int = 1) -> float:
    """Largest excess of |H(phi_j)| over the local energy at r_j (0 if none)."""
    excess = np.abs(H_of_phi(state.phi.values)) - staggered_local_energy(state, k)
    return float(max(0.0, np.max(excess)))


def h_bound_trajectory_check(traj: Trajectory) -> ValidationResult:
    worst = max((h_bound_check(s, traj.k) for s in traj.snapshots), default=0.0)
    return check_bound("h_bound", worst, H_BOUND_TOLERANCE)


def ht_energy_series(traj: Trajectory) -> np.ndarray:
    """Integral of h_t^2 r dr after every step."""
    return traj.series("ht_energy")


def _step_increments(energies: np.ndarray) -> np.ndarray:
    return np.diff(energies) if energies.size > 1 else np.zeros(0)


def energy_monotonicity_check(traj: Union[Trajectory, GLTrajectory]) -> ValidationResult:
    """Per-step increase of the scheme energy against the step slack."""
    if traj.dt is None:
        raise RangeError("trajectory carries no step size")
    slack = settings.energy_slack(traj.dt, traj.grid.dr)
    increments = _step_increments(traj.series("discrete_energy"))
    worst = float(np.max(increments)) if increments.size else 0.0
    result = check_bound(
        "energy_monotonicity", worst, slack, details={"steps": int(increments.size)}
    )
    if not result.valid:
        step = int(np.argmax(increments)) + 1
        logger.warning(f"Energy increased by {worst:.3e} at step {step} (slack {slack:.3e})")
    return result


def functional_monotonicity_check(traj: Trajectory) -> ValidationResult:
    """Per-step increase of the energy functional of the run's formulation.

    total_welss for h_form, total_wels for v_form. The sigma model
    conserves energy instead, so the check only warns there.
    """
    if traj.dt is None:
        raise RangeError("trajectory carries no step size")
    name = DISSIPATED_FUNCTIONAL.get(traj.formulation)
    if name is None:
        result = ValidationResult(valid=True, details={"formulation": str(traj.formulation)})
        result.add_warning("no dissipated functional for this formulation")
        return result
    slack = settings.energy_slack(traj.dt, traj.grid.dr)
    increments = _step_increments(traj.series(name))
    worst = float(np.max(increments)) if increments.size else 0.0
    result = check_bound(
        "functional_monotonicity",
        worst,
        slack,
        details={"functional": name, "steps": int(increments.size)},
    )
    if not result.valid:
        step = int(np.argmax(increments)) + 1
        logger.warning(f"{name} increased by {worst:.3e} at step {step} (slack {slack:.3e})")
    return result


def gl_penalty_check(traj: GLTrajectory) -> ValidationResult:
    """Penalty energy stays below the initial GL energy."""
    slack = settings.energy_slack(traj.dt, traj.grid.dr)
    penalty = traj.series("penalty")
    limit = float(traj.series("total")[0]) + slack
    return check_bound(
        "gl_penalty", float(np.max(penalty)), limit, details={"initial_penalty": float(penalty[0])}
    )


def pi_half_bound_check(traj: Trajectory, k: int = 1) -> ValidationResult:
    """max |phi| <= pi/2 when the threshold energy is below 4 and phi(r_max) = 0."""
    initial = energy_report(traj.snapshots[0], k)
    outer = float(traj.snapshots[0].phi.values[-1])
    max_phi = max(float(np.max(np.abs(s.phi.values))) for s in traj.snapshots)
    details: Dict[str, float] = {
        "threshold_energy": initial.threshold_energy,
        "max_abs_phi": max_phi,
    }
    if initial.threshold_energy >= BUBBLE_THRESHOLD or abs(outer) > 0.0:
        result = ValidationResult(valid=True, details=details)
        result.add_warning("pi/2 bound not applicable: energy at or above 4 or nonzero outer value")
        return result
    return check_bound("pi_half_bound", max_phi, 0.5 * np.pi + PI_HALF_TOLERANCE, details)

