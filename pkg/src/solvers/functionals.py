"""
Energy densities and discrete energy functionals shared by the solvers and
the diagnostics. All integrals are in the measure r dr.
"""

from typing import Optional

import numpy as np

from src.grid.radial_grid import RadialGrid


def axis_safe_ratio_sq(grid: RadialGrid, f: np.ndarray, f_r: np.ndarray) -> np.ndarray:
    """f^2/r^2 with the axis value replaced by its limit f_r(0)^2."""
    out = np.empty_like(f, dtype=float)
    out[1:] = (f[1:] / grid.nodes[1:]) ** 2
    out[0] = f_r[0] ** 2
    return out


def local_energy_density(
    grid: RadialGrid, phi: np.ndarray, phi_t: np.ndarray, k: int = 1
) -> np.ndarray:
    """e = phi_r^2/2 + phi_t^2/2 + k^2 sin^2(phi)/(2 r^2)."""
    phi_r = grid.central_derivative(phi)
    potential = np.empty_like(phi, dtype=float)
    potential[1:] = (np.sin(phi[1:]) / grid.nodes[1:]) ** 2
    # sin(phi) ~ phi_r(0) r near the axis
    potential[0] = phi_r[0] ** 2
    return 0.5 * phi_r**2 + 0.5 * phi_t**2 + 0.5 * k * k * potential


def h_energy_density(grid: RadialGrid, h: np.ndarray) -> np.ndarray:
    """(h_r^2 + h^2/r^2)/2."""
    h_r = grid.central_derivative(h)
    return 0.5 * (h_r**2 + axis_safe_ratio_sq(grid, h, h_r))


def welss_total(
    grid: RadialGrid, phi: np.ndarray, phi_t: np.ndarray, h: np.ndarray, k: int = 1
) -> float:
    """Energy of the (h, phi) form: director part plus (h_r^2 + h^2/r^2)/2."""
    return grid.integrate(local_energy_density(grid, phi, phi_t, k) + h_energy_density(grid, h))


def wels_total(
    grid: RadialGrid, phi: np.ndarray, phi_t: np.ndarray, v: np.ndarray, k: int = 1
) -> float:
    """Energy of the (v, phi) form: director part plus v^2/2."""
    return grid.integrate(local_energy_density(grid, phi, phi_t, k) + 0.5 * v * v)


def sine_potential(grid: RadialGrid, phi: np.ndarray, k: int = 1) -> np.ndarray:
    """k^2 sin^2(phi)/(2 r^2) at interior nodes; the axis carries zero weight."""
    out = np.zeros_like(phi, dtype=float)
    out[1:] = 0.5 * k * k * (np.sin(phi[1:]) / grid.nodes[1:]) ** 2
    return out


def wave_scheme_energy(
    grid: RadialGrid,
    phi_new: np.ndarray,
    phi_old: np.ndarray,
    dt: float,
    k: int = 1,
    weights: Optional[np.ndarray] = None,
) -> float:
    """Leapfrog energy between two time levels.

    Kinetic term from the one-sided difference, gradient term as the
    cross product of the two levels, potential averaged over both.
    """
    w = grid.weights if weights is None else weights
    velocity = (phi_new - phi_old) / dt
    kinetic = 0.5 * float(np.dot(w, velocity * velocity))
    gradient = 0.5 * grid.gradient_energy(phi_new, phi_old)
    potential = 0.5 * float(
        np.dot(w, sine_potential(grid, phi_new, k) + sine_potential(grid, phi_old, k))
    )
    return kinetic + gradient + potential


def h_scheme_energy(grid: RadialGrid, h: np.ndarray) -> float:
    """Half the form induced by the vector Laplacian."""
    return 0.5 * grid.vector_form(h)


def weighted_norm_sq(grid: RadialGrid, f: np.ndarray) -> float:
    return float(np.dot(grid.weights, f * f))
