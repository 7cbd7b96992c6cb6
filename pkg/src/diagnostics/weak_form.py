"""Residuals of the space-time weak formulations on a stored trajectory."""

from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.integrate import trapezoid

from src.solvers.director import Formulation, Trajectory
from src.utils.logging_config import get_logger
from src.utils.validators import RangeError

logger = get_logger(__name__)


@dataclass(frozen=True)
class BoxTestFunction:
    """psi = ((r - r0)(r1 - r))^2 ((t - t0)(t1 - t))^2 on the box, zero outside (C^1)."""

    r0: float
    r1: float
    t0: float
    t1: float

    def __post_init__(self):
        if not (0.0 < self.r0 < self.r1 and self.t0 < self.t1):
            raise RangeError("test box needs 0 < r0 < r1 and t0 < t1")

    @staticmethod
    def _bump(x, lo, hi):
        inside = (x > lo) & (x < hi)
        base = np.where(inside, (x - lo) * (hi - x), 0.0)
        slope = np.where(inside, hi + lo - 2.0 * x, 0.0)
        return base**2, 2.0 * base * slope

    def parts(self, r: np.ndarray, t: float):
        """(psi, psi_r, psi_t) at radii r and time t."""
        a, a_r = self._bump(np.asarray(r, dtype=float), self.r0, self.r1)
        b, b_t = self._bump(np.asarray(t, dtype=float), self.t0, self.t1)
        return a * b, a_r * b, a * b_t


@dataclass(frozen=True)
class WeakFormResiduals:
    """Residual of each identity over the magnitude of its largest term."""

    phi_residual: float
    v_residual: float
    phi_terms: List[float]
    v_terms: List[float]


def _normalized(terms: List[float]) -> float:
    scale = max(abs(t) for t in terms)
    return abs(sum(terms)) / scale if scale > 0 else 0.0


def weak_form_residuals(traj: Trajectory, test_function: BoxTestFunction) -> WeakFormResiduals:
    """Residuals of the phi- and v-equations tested against psi(r, t).

    phi: -phi_t psi_t + a phi_t psi + v_r psi + phi_r psi_r + k^2 sin(2 phi)/(2 r^2) psi
    v:   -v psi_t + v_r psi_r + phi_t psi_r
    """
    times = traj.times
    if test_function.t0 < times[0] or test_function.t1 > times[-1]:
        raise RangeError("test function support leaves the stored time range")
    if test_function.r1 > traj.grid.r_max:
        raise RangeError("test function support leaves the grid")

    grid = traj.grid
    r = grid.nodes
    coupled = traj.formulation != Formulation.SIGMA_MODEL
    damping = 2.0 if coupled else 0.0
    k = traj.k

    phi_rows, v_rows = [], []
    for state in traj.snapshots:
        psi, psi_r, psi_t = test_function.parts(r, state.time)
        phi, phi_t, v = state.phi.values, state.phi_t.values, state.v.values
        phi_r = grid.central_derivative(phi)
        v_r = grid.central_derivative(v)
        sine = np.zeros_like(phi)
        sine[1:] = k * k * np.sin(2.0 * phi[1:]) / (2.0 * r[1:] ** 2)
        phi_rows.append(
            [
                grid.integrate(-phi_t * psi_t),
                grid.integrate(damping * phi_t * psi),
                grid.integrate(v_r * psi) if coupled else 0.0,
                grid.integrate(phi_r * psi_r),
                grid.integrate(sine * psi),
            ]
        )
        v_rows.append(
            [
                grid.integrate(-v * psi_t),
                grid.integrate(v_r * psi_r),
                grid.integrate(phi_t * psi_r),
            ]
        )

    phi_terms = [float(trapezoid(col, times)) for col in np.asarray(phi_rows).T]
    v_terms = [float(trapezoid(col, times)) for col in np.asarray(v_rows).T]
    result = WeakFormResiduals(
        phi_residual=_normalized(phi_terms),
        v_residual=_normalized(v_terms) if coupled else 0.0,
        phi_terms=phi_terms,
        v_terms=v_terms,
    )
    logger.debug(
        f"Weak-form residuals: phi={result.phi_residual:.3e}, v={result.v_residual:.3e}"
    )
    return result
