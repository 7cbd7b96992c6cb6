"""
Backward light-cone diagnostics: energy flux through r = T - t, the local
energy inequality, annulus energies and cone averages of phi_t^2.

Fields between snapshots are linear in time. Cone integrals are trapezoid
sums over the snapshot times and the times at which the cone crosses a grid
node, of integrands that are non-negative by construction.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from src.grid.radial_grid import RadialGrid
from src.solvers.director import FieldState, Trajectory
from src.solvers.functionals import axis_safe_ratio_sq, local_energy_density
from src.utils.logging_config import get_logger
from src.utils.validators import RangeError, ResolutionError, ValidationResult, check_bound

logger = get_logger(__name__)

TIME_TOLERANCE = 1e-9
SNAPSHOTS_PER_TAU = 8
SUP_H_GROWTH_LIMIT = 10.0
# directional energy of the harmonic bubble; runs below it count as small
SMALL_ENERGY_LEVEL = 4.0


@dataclass(frozen=True)
class FluxReport:
    T: float
    tau: float
    flux_value: float
    integrand_min: float


@dataclass(frozen=True)
class ConeReport:
    """``annulus_energies`` has columns t, lam, energy; ``phit_cone_avg`` has tau, average."""

    T: float
    annulus_energies: pd.DataFrame
    phit_cone_avg: pd.DataFrame


def cone_density(state: FieldState, k: int = 1) -> np.ndarray:
    """e - phi_r phi_t = (phi_r - phi_t)^2/2 + k^2 sin^2(phi)/(2 r^2), node-wise >= 0."""
    grid = state.grid
    phi, phi_t = state.phi.values, state.phi_t.values
    phi_r = grid.central_derivative(phi)
    potential = axis_safe_ratio_sq(grid, np.sin(phi), phi_r)
    return 0.5 * (phi_r - phi_t) ** 2 + 0.5 * k * k * potential


def _check_window(traj: Trajectory, t_lo: float, t_hi: float) -> None:
    times = traj.times
    if t_lo > t_hi:
        raise RangeError(f"empty time window [{t_lo}, {t_hi}]")
    if t_lo < times[0] - TIME_TOLERANCE or t_hi > times[-1] + TIME_TOLERANCE:
        raise RangeError(
            f"window [{t_lo:.6g}, {t_hi:.6g}] not covered by snapshots "
            f"[{times[0]:.6g}, {times[-1]:.6g}]"
        )


def _blend(traj: Trajectory, arrays: List[np.ndarray], time: float) -> np.ndarray:
    """Node values at ``time``, linear in time between consecutive snapshots."""
    times = traj.times
    index = int(np.searchsorted(times, time, side="right")) - 1
    index = min(max(index, 0), len(times) - 1)
    if index == len(times) - 1 or abs(times[index] - time) <= TIME_TOLERANCE:
        return arrays[index]
    weight = (time - times[index]) / (times[index + 1] - times[index])
    return (1.0 - weight) * arrays[index] + weight * arrays[index + 1]


def _cone_points(traj: Trajectory, T: float, t_lo: float, t_hi: float) -> np.ndarray:
    """Window ends, snapshot times and the times at which T - t crosses a node."""
    crossings = T - traj.grid.nodes
    fixed = np.concatenate([traj.times, crossings])
    inside = fixed[(fixed > t_lo) & (fixed < t_hi)]
    return np.unique(np.concatenate([[t_lo], inside, [t_hi]]))


def _cone_integral(
    traj: Trajectory,
    T: float,
    t_lo: float,
    t_hi: float,
    arrays: List[np.ndarray],
    radial: Callable[[np.ndarray, float], float],
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Trapezoid in t of radial(blended nodes, T - t); returns (value, points, samples)."""
    points = _cone_points(traj, T, t_lo, t_hi)
    samples = np.array(
        [radial(_blend(traj, arrays, t), max(T - t, 0.0)) for t in points], dtype=float
    )
    value = float(trapezoid(samples, points)) if len(points) > 1 else 0.0
    return value, points, samples


def _check_cone(traj: Trajectory, T: float, t_lo: float, t_hi: float) -> None:
    if t_hi > T + TIME_TOLERANCE:
        raise RangeError(f"window end {t_hi} lies past the cone apex T={T}")
    if T - t_lo > traj.grid.r_max * (1.0 + 1e-12):
        raise RangeError(f"cone base radius {T - t_lo:.6g} exceeds r_max={traj.grid.r_max}")
    _check_window(traj, t_lo, t_hi)


def cone_flux(
    traj: Trajectory, T: float, t_lo: float, t_hi: float, k: Optional[int] = None
) -> Tuple[float, float]:
    """Flux through r = T - t over [t_lo, t_hi] and the integrand minimum there.

    The integrand q r on the cone is the linear interpolant of the nodal
    products, the same integrand E(R) integrates, so a static field moves
    energy across the cone without quadrature mismatch.
    """
    _check_cone(traj, T, t_lo, t_hi)
    k = traj.k if k is None else k
    nodes = traj.grid.nodes
    densities = [cone_density(state, k) for state in traj.snapshots]

    value, points, _ = _cone_integral(
        traj, T, t_lo, t_hi, densities, lambda q, radius: float(np.interp(radius, nodes, q * nodes))
    )
    minimum = min(
        float(np.interp(max(T - t, 0.0), nodes, _blend(traj, densities, t))) for t in points
    )
    return value, minimum


def flux(traj: Trajectory, T: float, tau: float) -> FluxReport:
    """Flux(T, T - tau) through the backward cone with apex T."""
    if tau <= 0:
        raise RangeError(f"tau must be positive, got {tau}")
    value, minimum = cone_flux(traj, T, T - tau, T)
    return FluxReport(T=T, tau=tau, flux_value=value, integrand_min=minimum)


def _fields_at(traj: Trajectory, time: float, k: int) -> np.ndarray:
    """Energy density at ``time``, linear in time between snapshots."""
    _check_window(traj, time, time)
    times = traj.times
    index = int(np.searchsorted(times, time, side="right")) - 1
    index = min(max(index, 0), len(times) - 1)
    here = traj.snapshots[index]
    density = local_energy_density(traj.grid, here.phi.values, here.phi_t.values, k)
    if abs(times[index] - time) <= TIME_TOLERANCE or index == len(times) - 1:
        return density
    there = traj.snapshots[index + 1]
    weight = (time - times[index]) / (times[index + 1] - times[index])
    other = local_energy_density(traj.grid, there.phi.values, there.phi_t.values, k)
    return (1.0 - weight) * density + weight * other


def local_energy_at(traj: Trajectory, radius: float, time: float, k: Optional[int] = None) -> float:
    """E(radius, time), the energy inside ``radius``."""
    grid = traj.grid
    if radius < 0 or radius > grid.r_max * (1.0 + 1e-12):
        raise RangeError(f"radius {radius} outside [0, {grid.r_max}]")
    density = _fields_at(traj, time, traj.k if k is None else k)
    return float(grid.integral_to(density, min(radius, grid.r_max))[0])


def default_c_test(traj: Trajectory) -> float:
    """sup over steps of the integral of h_t^2 r dr (0 without per-step records)."""
    if not traj.diagnostics:
        return 0.0
    return float(np.max(traj.series("ht_energy")))


def local_energy_monotonicity(
    traj: Trajectory,
    T: float,
    R: float,
    s: float,
    tau: float,
    c_test: Optional[float] = None,
) -> float:
    """max(0, E(R, s) + Flux(s, s - tau) - E(R + tau, s - tau) - C tau)."""
    if abs(R + s - T) > TIME_TOLERANCE * max(1.0, abs(T)):
        raise RangeError(f"R + s = {R + s} does not match the apex T = {T}")
    if R <= 0 or tau <= 0:
        raise RangeError("R and tau must be positive")
    if R + tau > traj.grid.r_max:
        raise RangeError(f"R + tau = {R + tau} exceeds r_max = {traj.grid.r_max}")
    c = default_c_test(traj) if c_test is None else c_test

    inner = local_energy_at(traj, R, s)
    outer = local_energy_at(traj, R + tau, s - tau)
    flux_value, _ = cone_flux(traj, T, s - tau, s)
    violation = inner + flux_value - outer - c * tau
    logger.debug(
        f"Local energy at T={T}, s={s}, tau={tau}: E_in={inner:.6g}, flux={flux_value:.6g}, "
        f"E_out={outer:.6g}, C={c:.3g}"
    )
    return float(max(0.0, violation))


def _check_density(traj: Trajectory, taus: Sequence[float]) -> None:
    if len(traj.snapshots) < 2:
        raise ResolutionError("cone integrals need at least two snapshots")
    spacing = float(np.max(np.diff(traj.times)))
    tau_min = float(min(taus))
    if spacing > tau_min / SNAPSHOTS_PER_TAU + TIME_TOLERANCE:
        raise ResolutionError(
            f"snapshot spacing {spacing:.4g} exceeds tau_min/{SNAPSHOTS_PER_TAU} = "
            f"{tau_min / SNAPSHOTS_PER_TAU:.4g}",
            details={"spacing": spacing, "tau_min": tau_min},
        )


def cone_reports(
    traj: Trajectory, T: float, lambdas: Sequence[float], taus: Sequence[float]
) -> ConeReport:
    """Annulus energies between lam (T - t) and T - t, and cone averages of phi_t^2."""
    if any(not 0.0 < lam < 1.0 for lam in lambdas):
        raise RangeError("every lambda must lie in (0, 1)")
    if any(tau <= 0 for tau in taus):
        raise RangeError("every tau must be positive")
    _check_density(traj, taus)
    grid = traj.grid
    k = traj.k

    rows = []
    for state in traj.snapshots:
        radius = T - state.time
        if radius <= TIME_TOLERANCE or radius > grid.r_max:
            continue
        density = local_energy_density(grid, state.phi.values, state.phi_t.values, k)
        for lam in lambdas:
            inner, outer = grid.integral_to(density, np.array([lam * radius, radius]))
            rows.append({"t": state.time, "lam": float(lam), "energy": float(outer - inner)})
    annulus = pd.DataFrame(rows, columns=["t", "lam", "energy"])

    kinetic = [state.phi_t.values**2 for state in traj.snapshots]
    averages = []
    for tau in taus:
        _check_cone(traj, T, T - tau, T)
        value, _, _ = _cone_integral(
            traj, T, T - tau, T, kinetic, lambda f, radius: float(grid.integral_to(f, radius)[0])
        )
        averages.append({"tau": float(tau), "average": value / tau})
    return ConeReport(
        T=T,
        annulus_energies=annulus,
        phit_cone_avg=pd.DataFrame(averages, columns=["tau", "average"]),
    )


def sup_norms_h(traj: Trajectory) -> Tuple[float, float]:
    """(max |h_r|, max |h_t|) over the trajectory."""
    if traj.diagnostics:
        return float(np.max(traj.series("sup_hr"))), float(np.max(traj.series("sup_ht")))
    grid: RadialGrid = traj.grid
    sup_hr = max(float(np.max(np.abs(np.diff(s.h.values)))) / grid.dr for s in traj.snapshots)
    sup_ht = 0.0
    for before, after in zip(traj.snapshots[:-1], traj.snapshots[1:]):
        rate = (after.h.values - before.h.values) / (after.time - before.time)
        sup_ht = max(sup_ht, float(np.max(np.abs(rate))))
    return sup_hr, sup_ht


def sup_h_growth(traj: Trajectory) -> Tuple[float, float]:
    """Growth of max |h_r| and max |h_t| over their t = 0 values."""
    if not traj.diagnostics:
        raise RangeError("trajectory carries no per-step diagnostics")
    growth = []
    for name in ("sup_hr", "sup_ht"):
        series = traj.series(name)
        initial = float(series[0])
        growth.append(float(np.max(series)) / initial if initial > 0.0 else float("inf"))
    return growth[0], growth[1]


def sup_h_growth_check(traj: Trajectory) -> ValidationResult:
    """sup |h_r| and sup |h_t| stay within SUP_H_GROWTH_LIMIT times their t = 0 values."""
    first = traj.diagnostics[0]
    details = {
        "initial_sup_hr": first.sup_hr,
        "initial_sup_ht": first.sup_ht,
        "threshold_energy": 2.0 * first.total_welss,
    }
    if first.sup_hr <= 0.0 or first.sup_ht <= 0.0 or 2.0 * first.total_welss >= SMALL_ENERGY_LEVEL:
        result = ValidationResult(valid=True, details=details)
        result.add_warning("sup-h growth not applicable: zero initial h or energy at or above 4")
        return result
    return check_bound("sup_h_growth", max(sup_h_growth(traj)), SUP_H_GROWTH_LIMIT, details)


def boundary_drift(traj: Trajectory) -> float:
    """Largest change of phi and v at r = 0 and r = r_max from their initial values."""
    first = traj.snapshots[0]
    drift = 0.0
    for state in traj.snapshots:
        for name in ("phi", "v"):
            now = getattr(state, name).values
            then = getattr(first, name).values
            drift = max(drift, abs(now[0] - then[0]), abs(now[-1] - then[-1]))
    return float(drift)
