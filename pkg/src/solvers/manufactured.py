"""
Manufactured solutions for the (v, phi) system and grid-refinement studies.

Forcing terms are derived symbolically so that a chosen pair (phi, v) solves
the forced system exactly.
"""

from dataclasses import dataclass
from typing import Callable, List, Sequence

import numpy as np
import sympy as sp

from src.grid.radial_grid import RadialField, RadialGrid, build_grid
from src.solvers.director import (
    Forcing,
    Formulation,
    SolverConfig,
    h_values_from_v,
    v_values_from_h,
    run,
)
from src.solvers.functionals import weighted_norm_sq
from src.solvers.initial_data import TableData, table_from_function, table_profile
from src.utils.logging_config import get_logger
from src.utils.validators import ConfigurationError

logger = get_logger(__name__)

r, t = sp.symbols("r t", nonnegative=True)


def _bessel(expr):
    return sp.diff(r * sp.diff(expr, r), r) / r


def _lambdify_interior(expr) -> Callable[[np.ndarray, float], np.ndarray]:
    """Vectorised evaluation with the axis node set to zero (it is pinned)."""
    fn = sp.lambdify((r, t), expr, modules="numpy")

    def evaluate(nodes: np.ndarray, time: float) -> np.ndarray:
        out = np.zeros_like(nodes, dtype=float)
        out[1:] = np.broadcast_to(fn(nodes[1:], time), nodes[1:].shape)
        return out

    return evaluate


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact (phi, v) and the sources making them solve the v_form system."""

    phi_expr: sp.Expr
    v_expr: sp.Expr

    @property
    def forcing_exprs(self):
        phi, v = self.phi_expr, self.v_expr
        phi_t = sp.diff(phi, t)
        f_v = sp.diff(v, t) - _bessel(v) - sp.diff(r * phi_t, r) / r
        f_phi = (
            sp.diff(phi, t, 2)
            + 2 * phi_t
            - _bessel(phi)
            + sp.sin(2 * phi) / (2 * r**2)
            + sp.diff(v, r)
        )
        return sp.simplify(f_phi), sp.simplify(f_v)

    def exact(self, grid: RadialGrid, time: float):
        phi = _lambdify_interior(self.phi_expr)(grid.nodes, time)
        v = _lambdify_interior(self.v_expr)(grid.nodes, time)
        return phi, v

    def forcing(self, grid: RadialGrid) -> Forcing:
        f_phi_expr, f_v_expr = self.forcing_exprs
        f_phi = _lambdify_interior(f_phi_expr)
        f_v = _lambdify_interior(f_v_expr)
        return Forcing(
            phi=lambda time: RadialField(grid, f_phi(grid.nodes, time)),
            v=lambda time: RadialField(grid, f_v(grid.nodes, time)),
        )

    def initial_data(self, grid: RadialGrid) -> TableData:
        phi0 = _lambdify_interior(self.phi_expr)
        phi1 = _lambdify_interior(sp.diff(self.phi_expr, t))
        v0 = _lambdify_interior(self.v_expr)
        return table_from_function(
            grid,
            lambda nodes: phi0(nodes, 0.0),
            phi1=table_profile(grid, lambda nodes: phi1(nodes, 0.0)),
            v0=table_profile(grid, lambda nodes: v0(nodes, 0.0)),
        )


def default_solution() -> ManufacturedSolution:
    """phi = sin(t) r exp(-r^2), v = t r exp(-r)."""
    return ManufacturedSolution(
        phi_expr=sp.sin(t) * r * sp.exp(-(r**2)),
        v_expr=t * r * sp.exp(-r),
    )


@dataclass(frozen=True)
class ConvergenceReport:
    """Errors and observed orders from a grid-refinement study."""

    cell_counts: List[int]
    dr: List[float]
    errors_phi: List[float]
    errors_v: List[float]
    differences_phi: List[float]
    differences_v: List[float]
    order_phi: float
    order_v: float
    order_exact_phi: float
    order_exact_v: float


def _observed_order(coarse: float, fine: float, ratio: float) -> float:
    if coarse <= 0.0 or fine <= 0.0:
        return float("inf")
    return float(np.log(coarse / fine) / np.log(ratio))


def _check_refinement(cell_counts: Sequence[int]) -> float:
    if len(cell_counts) != 3:
        raise ConfigurationError("a refinement study needs exactly three grids")
    ratio = cell_counts[1] / cell_counts[0]
    if cell_counts[2] != cell_counts[1] * ratio or cell_counts[1] % cell_counts[0]:
        raise ConfigurationError(f"cell counts {list(cell_counts)} are not a uniform refinement")
    return ratio


def convergence_study(
    solution: ManufacturedSolution,
    r_max: float,
    cell_counts: Sequence[int],
    dt: float,
    t_end: float,
) -> ConvergenceReport:
    """Run the forced v_form on three grids with a common dt.

    Orders come from successive differences on the coarse nodes, which
    removes the time error shared by all three runs.
    """
    ratio = _check_refinement(cell_counts)
    finals = []
    errors_phi, errors_v = [], []
    for n_cells in cell_counts:
        grid = build_grid(r_max, n_cells)
        config = SolverConfig(
            formulation=Formulation.V_FORM,
            dt=dt,
            t_end=t_end,
            initial_data=solution.initial_data(grid),
            forcing=solution.forcing(grid),
            snapshot_every=10**9,
        )
        trajectory = run(config, grid)
        final = trajectory.snapshots[-1]
        exact_phi, exact_v = solution.exact(grid, final.time)
        errors_phi.append(np.sqrt(weighted_norm_sq(grid, final.phi.values - exact_phi)))
        errors_v.append(np.sqrt(weighted_norm_sq(grid, final.v.values - exact_v)))
        finals.append((grid, final))

    coarse_grid = finals[0][0]

    def restricted(index: int, name: str) -> np.ndarray:
        grid, state = finals[index]
        stride = grid.n_cells // coarse_grid.n_cells
        return getattr(state, name).values[::stride]

    def difference(a: int, b: int, name: str) -> float:
        return float(np.sqrt(weighted_norm_sq(coarse_grid, restricted(a, name) - restricted(b, name))))

    differences_phi = [difference(0, 1, "phi"), difference(1, 2, "phi")]
    differences_v = [difference(0, 1, "v"), difference(1, 2, "v")]
    report = ConvergenceReport(
        cell_counts=list(cell_counts),
        dr=[r_max / n for n in cell_counts],
        errors_phi=[float(e) for e in errors_phi],
        errors_v=[float(e) for e in errors_v],
        differences_phi=differences_phi,
        differences_v=differences_v,
        order_phi=_observed_order(*differences_phi, ratio),
        order_v=_observed_order(*differences_v, ratio),
        order_exact_phi=_observed_order(errors_phi[1], errors_phi[2], ratio),
        order_exact_v=_observed_order(errors_v[1], errors_v[2], ratio),
    )
    logger.info(
        f"Refinement study: order_phi={report.order_phi:.3f}, order_v={report.order_v:.3f}"
    )
    return report


def roundtrip_errors(
    v_fn: Callable[[np.ndarray], np.ndarray], r_max: float, cell_counts: Sequence[int]
) -> List[float]:
    """Max-norm error of v_from_h(h_from_v(v)) on each grid."""
    errors = []
    for n_cells in cell_counts:
        grid = build_grid(r_max, n_cells)
        v = v_fn(grid.nodes)
        back = v_values_from_h(grid, h_values_from_v(grid, v))
        errors.append(float(np.max(np.abs(back - v))))
    return errors


def roundtrip_order(
    v_fn: Callable[[np.ndarray], np.ndarray], r_max: float, cell_counts: Sequence[int]
) -> float:
    ratio = _check_refinement(cell_counts)
    errors = roundtrip_errors(v_fn, r_max, cell_counts)
    return _observed_order(errors[1], errors[2], ratio)

