"""
Uniform radial mesh, conservative radial operators and r dr quadrature.

Node-level operators act on plain numpy arrays so the steppers can use them
in tight loops; the public operations wrap them for RadialField values.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Union

import numpy as np

from src.utils.validators import (
    ConfigurationError,
    ContractViolationError,
    RangeError,
    require_finite,
)

MIN_CELLS = 8
AXIS_TOLERANCE = 1e-12


class AxisPolicy(str, Enum):
    """Behaviour of a field at r = 0."""

    DIRICHLET_ZERO = "dirichlet_zero"
    NEUMANN = "neumann"


def _frozen(values: np.ndarray) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform mesh r_j = j*dr on [0, r_max]."""

    r_max: float
    n_cells: int
    dr: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False)
    half_nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    energy_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not np.isfinite(self.r_max) or self.r_max <= 0:
            raise ConfigurationError(f"r_max must be positive, got {self.r_max}")
        if int(self.n_cells) != self.n_cells or self.n_cells < MIN_CELLS:
            raise ConfigurationError(
                f"n_cells must be an integer >= {MIN_CELLS}, got {self.n_cells}"
            )
        dr = self.r_max / self.n_cells
        nodes = dr * np.arange(self.n_cells + 1, dtype=float)
        nodes[-1] = self.r_max
        half_nodes = dr * (np.arange(self.n_cells, dtype=float) + 0.5)

        # trapezoid in the measure r dr
        weights = nodes * dr
        weights[-1] *= 0.5

        # node 0 owns the disc of radius dr/2; makes the neumann axis stencil
        # self-adjoint under these weights
        energy_weights = weights.copy()
        energy_weights[0] = dr * dr / 8.0

        object.__setattr__(self, "n_cells", int(self.n_cells))
        object.__setattr__(self, "dr", dr)
        object.__setattr__(self, "nodes", _frozen(nodes))
        object.__setattr__(self, "half_nodes", _frozen(half_nodes))
        object.__setattr__(self, "weights", _frozen(weights))
        object.__setattr__(self, "energy_weights", _frozen(energy_weights))

    @property
    def size(self) -> int:
        return self.n_cells + 1

    def same_as(self, other: "RadialGrid") -> bool:
        return self.n_cells == other.n_cells and np.isclose(
            self.r_max, other.r_max, rtol=1e-14, atol=0.0
        )

    # ---- differential operators on node arrays -------------------------

    def laplacian(self, f: np.ndarray, axis: AxisPolicy) -> np.ndarray:
        """Conservative (1/r)(r f_r)_r; zero rows at pinned nodes."""
        dr = self.dr
        out = np.zeros_like(f, dtype=float)
        flux = self.half_nodes * np.diff(f)
        out[1:-1] = (flux[1:] - flux[:-1]) / (self.nodes[1:-1] * dr * dr)
        if axis == AxisPolicy.NEUMANN:
            out[0] = 4.0 * (f[1] - f[0]) / (dr * dr)
        return out

    def vector_laplacian(self, f: np.ndarray) -> np.ndarray:
        """(1/r)(r f_r)_r - f/r^2 with both ends pinned.

        Written as ((r f)_r / r)_r: half-node fluxes of g = r f divided by
        r_{j+1/2}. Exact on r and r^3 and second order up to node 1.
        """
        dr = self.dr
        out = np.zeros_like(f, dtype=float)
        flux = np.diff(self.nodes * f) / self.half_nodes
        out[1:-1] = (flux[1:] - flux[:-1]) / (dr * dr)
        return out

    def vector_form(self, f: np.ndarray, g: Union[np.ndarray, None] = None) -> float:
        """Half-node form of the integral of (f_r + f/r)(g_r + g/r) r dr.

        Equals -sum(weights * f * vector_laplacian(g)) when f vanishes at both ends.
        """
        df = np.diff(self.nodes * f)
        dg = df if g is None else np.diff(self.nodes * g)
        return float(np.sum(df * dg / self.half_nodes) / self.dr)

    def variable_laplacian(self, f: np.ndarray, coefficient: np.ndarray) -> np.ndarray:
        """(1/r)(r a f_r)_r with ``coefficient`` given at half nodes."""
        dr = self.dr
        out = np.zeros_like(f, dtype=float)
        flux = coefficient * self.half_nodes * np.diff(f)
        out[1:-1] = (flux[1:] - flux[:-1]) / (self.nodes[1:-1] * dr * dr)
        return out

    def weighted_gradient(self, f: np.ndarray) -> np.ndarray:
        """Node derivative built from r-weighted half-node slopes.

        Discrete adjoint of ``divergence`` under ``weights`` for fields pinned
        at both ends.
        """
        dr = self.dr
        slope_flux = self.half_nodes * np.diff(f) / dr
        out = np.empty_like(f, dtype=float)
        out[1:-1] = (slope_flux[1:] + slope_flux[:-1]) / (2.0 * self.nodes[1:-1])
        out[0] = (f[1] - f[0]) / dr
        out[-1] = (f[-1] - f[-2]) / dr
        return out

    def divergence(self, g: np.ndarray) -> np.ndarray:
        """(1/r)(r g)_r with g averaged to half nodes; zero at both ends."""
        dr = self.dr
        flux = self.half_nodes * (g[1:] + g[:-1])
        out = np.zeros_like(g, dtype=float)
        out[1:-1] = (flux[1:] - flux[:-1]) / (2.0 * self.nodes[1:-1] * dr)
        return out

    def central_derivative(self, f: np.ndarray) -> np.ndarray:
        return np.gradient(f, self.dr, edge_order=2)

    def gradient_energy(self, f: np.ndarray, g: Union[np.ndarray, None] = None) -> float:
        """Half-node form of the integral of f_r g_r r dr."""
        df = np.diff(f)
        dg = df if g is None else np.diff(g)
        return float(np.sum(self.half_nodes * df * dg) / self.dr)

    # ---- quadrature -----------------------------------------------------

    def integrate(self, f: np.ndarray) -> float:
        """Trapezoid integral of f r dr over the whole grid."""
        return float(np.dot(self.weights, f))

    def cumulative_trapezoid(self, f: np.ndarray) -> np.ndarray:
        """Integral of f r dr from 0 to every node."""
        g = f * self.nodes
        out = np.zeros_like(g, dtype=float)
        out[1:] = np.cumsum(0.5 * (g[1:] + g[:-1]) * self.dr)
        return out

    def cumulative_radial_integral(self, f: np.ndarray) -> np.ndarray:
        """Integral of f r dr from 0 to every node, quadratic panels.

        Exact whenever f*r is a quadratic polynomial.
        """
        dr = self.dr
        g = f * self.nodes
        panels = np.empty(self.n_cells, dtype=float)
        panels[0] = (5.0 * g[0] + 8.0 * g[1] - g[2]) * dr / 12.0
        panels[1:] = (-g[:-2] + 8.0 * g[1:-1] + 5.0 * g[2:]) * dr / 12.0
        out = np.zeros_like(g, dtype=float)
        out[1:] = np.cumsum(panels)
        return out

    def integral_to(self, f: np.ndarray, radii: np.ndarray) -> np.ndarray:
        """Integral of f r dr from 0 to arbitrary radii.

        The integrand f*r is taken piecewise linear, so cells cut by a radius
        use the interpolated integrand and the result is additive.
        """
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        g = f * self.nodes
        cumulative = self.cumulative_trapezoid(f)
        cell = np.clip(np.floor(radii / self.dr).astype(int), 0, self.n_cells - 1)
        offset = radii - self.nodes[cell]
        slope = (g[cell + 1] - g[cell]) / self.dr
        return cumulative[cell] + offset * g[cell] + 0.5 * offset * offset * slope

    def interpolate(self, f: np.ndarray, radii: np.ndarray) -> np.ndarray:
        return np.interp(radii, self.nodes, f)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Node values of one scalar on a grid."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ContractViolationError(
                f"field has {values.size} values, grid has {self.grid.size} nodes"
            )
        require_finite(values, "RadialField")
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.size))

    @classmethod
    def from_function(cls, grid: RadialGrid, fn) -> "RadialField":
        return cls(grid, fn(grid.nodes))


def build_grid(r_max: float, n_cells: int) -> RadialGrid:
    """Build a uniform radial grid (configuration error on bad input)."""
    return RadialGrid(r_max=float(r_max), n_cells=n_cells)


def apply_bessel_laplacian(f: RadialField, axis_policy: AxisPolicy) -> RadialField:
    return RadialField(f.grid, f.grid.laplacian(f.values, AxisPolicy(axis_policy)))


def apply_vector_laplacian(f: RadialField) -> RadialField:
    if abs(f.values[0]) > AXIS_TOLERANCE:
        raise ContractViolationError(
            f"vector Laplacian needs f(0) = 0, got {f.values[0]:.3e}",
            details={"axis_value": float(f.values[0])},
        )
    return RadialField(f.grid, f.grid.vector_laplacian(f.values))


def radial_gradient(f: RadialField) -> RadialField:
    return RadialField(f.grid, f.grid.weighted_gradient(f.values))


def radial_divergence(g: RadialField) -> RadialField:
    return RadialField(g.grid, g.grid.divergence(g.values))


def cumulative_radial_integral(f: RadialField) -> RadialField:
    return RadialField(f.grid, f.grid.cumulative_radial_integral(f.values))


def gradient_energy(f: RadialField) -> float:
    return f.grid.gradient_energy(f.values)


def integrate_radial(f: RadialField, r_lo: float, r_hi: float) -> float:
    """Integral of f r dr over [r_lo, r_hi]."""
    grid = f.grid
    tolerance = AXIS_TOLERANCE * grid.r_max
    if r_lo < 0 or r_hi > grid.r_max + tolerance or r_lo > r_hi:
        raise RangeError(
            f"integration bounds [{r_lo}, {r_hi}] outside [0, {grid.r_max}]",
            details={"r_lo": r_lo, "r_hi": r_hi, "r_max": grid.r_max},
        )
    if r_lo == r_hi:
        return 0.0
    bounds = grid.integral_to(f.values, np.array([r_lo, min(r_hi, grid.r_max)]))
    return float(bounds[1] - bounds[0])


# ---- refinement checks ------------------------------------------------------

# smooth test functions with closed-form images, (f, exact operator value)
_BESSEL_CASE = (
    lambda r: np.exp(-r * r),
    lambda r: (4.0 * r * r - 4.0) * np.exp(-r * r),
)
_VECTOR_CASE = (
    lambda r: r * np.exp(-r * r),
    lambda r: (4.0 * r**3 - 8.0 * r) * np.exp(-r * r),
)


def laplacian_errors(n_cells: int, r_max: float = 1.0) -> Dict[str, float]:
    """Max node error of the neumann Bessel and the vector Laplacian.

    The Bessel error includes the axis node; both exclude the outer node.
    """
    grid = build_grid(r_max, n_cells)
    r = grid.nodes
    f, exact = _BESSEL_CASE
    bessel = grid.laplacian(f(r), AxisPolicy.NEUMANN)[:-1] - exact(r)[:-1]
    f, exact = _VECTOR_CASE
    vector = grid.vector_laplacian(f(r))[1:-1] - exact(r)[1:-1]
    return {
        "bessel": float(np.max(np.abs(bessel))),
        "vector": float(np.max(np.abs(vector))),
    }


def operator_error_ratios(n_cells: int = 100, r_max: float = 1.0) -> Dict[str, float]:
    """Error reduction of both Laplacians when dr is halved (4 for second order)."""
    coarse = laplacian_errors(n_cells, r_max)
    fine = laplacian_errors(2 * n_cells, r_max)
    return {name: coarse[name] / fine[name] for name in coarse}


def additivity_defect(f: RadialField, a: float, b: float, c: float) -> float:
    """Relative mismatch of [a, b] + [b, c] against [a, c] for integrate_radial."""
    whole = integrate_radial(f, a, c)
    parts = integrate_radial(f, a, b) + integrate_radial(f, b, c)
    scale = abs(whole) if whole != 0.0 else 1.0
    return abs(parts - whole) / scale
