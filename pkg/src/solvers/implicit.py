"""Backward-Euler solves for the radial diffusion operators."""

from enum import Enum
from typing import Optional

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import factorized, spsolve

from src.grid.radial_grid import RadialGrid


class OperatorKind(str, Enum):
    BESSEL_DIRICHLET = "bessel_dirichlet"
    BESSEL_NEUMANN = "bessel_neumann"
    VECTOR = "vector"


def operator_diagonals(
    grid: RadialGrid, kind: OperatorKind, coefficient: Optional[np.ndarray] = None
):
    """Lower, main and upper diagonals of the discrete operator.

    Rows of pinned nodes are zero. ``coefficient`` lives on half nodes.
    """
    n = grid.size
    dr = grid.dr
    a = np.ones(grid.n_cells) if coefficient is None else np.asarray(coefficient)
    flux = a * grid.half_nodes

    lower = np.zeros(n)
    main = np.zeros(n)
    upper = np.zeros(n)
    r = grid.nodes[1:-1]
    if kind == OperatorKind.VECTOR:
        # flux form in r*f, matching RadialGrid.vector_laplacian
        inner = 1.0 / (grid.half_nodes[:-1] * dr * dr)
        outer = 1.0 / (grid.half_nodes[1:] * dr * dr)
        lower[1:-1] = grid.nodes[:-2] * inner
        upper[1:-1] = grid.nodes[2:] * outer
        main[1:-1] = -r * (inner + outer)
        return lower, main, upper
    lower[1:-1] = flux[:-1] / (r * dr * dr)
    upper[1:-1] = flux[1:] / (r * dr * dr)
    main[1:-1] = -(lower[1:-1] + upper[1:-1])
    if kind == OperatorKind.BESSEL_NEUMANN:
        main[0] = -4.0 * a[0] / (dr * dr)
        upper[0] = 4.0 * a[0] / (dr * dr)
    return lower, main, upper


def implicit_matrix(
    grid: RadialGrid,
    dt: float,
    kind: OperatorKind,
    coefficient: Optional[np.ndarray] = None,
) -> sparse.csc_matrix:
    """I - dt*L with identity rows for pinned nodes."""
    lower, main, upper = operator_diagonals(grid, kind, coefficient)
    return sparse.diags(
        [-dt * lower[1:], 1.0 - dt * main, -dt * upper[:-1]],
        [-1, 0, 1],
        format="csc",
    )


class ImplicitDiffusion:
    """Prefactored backward-Euler step for a fixed operator and dt."""

    def __init__(self, grid: RadialGrid, dt: float, kind: OperatorKind):
        self.grid = grid
        self.dt = dt
        self.kind = kind
        self._solve = factorized(implicit_matrix(grid, dt, kind))

    def solve(self, rhs: np.ndarray, outer_value: float, axis_value: float = 0.0) -> np.ndarray:
        """Solve (I - dt L) u = rhs with the pinned node values imposed."""
        rhs = np.array(rhs, dtype=float)
        if self.kind != OperatorKind.BESSEL_NEUMANN:
            rhs[0] = axis_value
        rhs[-1] = outer_value
        out = self._solve(rhs)
        if self.kind != OperatorKind.BESSEL_NEUMANN:
            out[0] = axis_value
        out[-1] = outer_value
        return out


def solve_variable_diffusion(
    grid: RadialGrid,
    dt: float,
    coefficient: np.ndarray,
    rhs: np.ndarray,
    outer_value: float,
) -> np.ndarray:
    """One backward-Euler solve of (1/r)(r a u_r)_r with u(0) and u(r_max) pinned."""
    matrix = implicit_matrix(grid, dt, OperatorKind.BESSEL_DIRICHLET, coefficient)
    rhs = np.array(rhs, dtype=float)
    rhs[0] = 0.0
    rhs[-1] = outer_value
    out = spsolve(matrix, rhs)
    out[0] = 0.0
    out[-1] = outer_value
    return out
