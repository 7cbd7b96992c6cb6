"""
Ginzburg-Landau relaxation of the director system, reduced to radial form.

The director is d = (u cos(theta), u sin(theta), w) with the unit-length
constraint replaced by the penalty (|d|^2 - 1)^2 / (4 eps^2):

    v_t  = (1/r)(r (1/2 + |d|^2/2) v_r)_r + (1/r)(r (w u_t - u w_t))_r
    u_tt + 2 u_t + v_r w = L_vec u - (|d|^2 - 1)/eps^2 u
    w_tt + 2 w_t - v_r u = L w     - (|d|^2 - 1)/eps^2 w      (neumann axis)
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.grid.radial_grid import AxisPolicy, RadialField, RadialGrid
from src.solvers.director import (
    DOMAIN_FRACTION,
    FieldState,
    Trajectory,
    guard_divergence,
    leapfrog_update,
)
from src.solvers.functionals import weighted_norm_sq
from src.solvers.implicit import solve_variable_diffusion
from src.solvers.initial_data import InitialDataSpec, ZeroData, evaluate_profile
from src.utils.logging_config import get_logger
from src.utils.performance import performance_monitor
from src.utils.validators import ComparisonError, ConfigurationError, DivergenceError

logger = get_logger(__name__)

GL_DAMPING = 2.0
STIFFNESS_FACTOR = 0.5
DEGENERATE_MODULUS = 1e-12
EXCLUDED_FRACTION_WARNING = 0.01


@dataclass(frozen=True, eq=False)
class GLState:
    grid: RadialGrid
    u: RadialField
    w: RadialField
    u_t: RadialField
    w_t: RadialField
    v: RadialField
    epsilon: float
    time: float
    u_prev: RadialField
    w_prev: RadialField
    step_index: int = 0

    @property
    def modulus_sq(self) -> np.ndarray:
        return self.u.values**2 + self.w.values**2


@dataclass(frozen=True)
class GLEnergy:
    kinetic: float
    elastic: float
    penalty: float
    fluid: float
    total: float
    dissipation: float = 0.0


@dataclass(frozen=True)
class GLStepDiagnostics:
    time: float
    discrete_energy: float
    dissipation: float
    dissipation_residual: float
    energy: GLEnergy


@dataclass(eq=False)
class GLTrajectory:
    grid: RadialGrid
    epsilon: float
    snapshots: List[GLState] = field(default_factory=list)
    diagnostics: List[GLStepDiagnostics] = field(default_factory=list)
    dt: Optional[float] = None
    failure_time: Optional[float] = None
    failure_message: Optional[str] = None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def failed(self) -> bool:
        return self.failure_time is not None

    def series(self, name: str) -> np.ndarray:
        if name in GLEnergy.__dataclass_fields__:
            return np.array([getattr(d.energy, name) for d in self.diagnostics])
        return np.array([getattr(d, name) for d in self.diagnostics])


class GLConfig(BaseModel):
    """Parameters of one Ginzburg-Landau run."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    epsilon: float = Field(..., gt=0.0, description="Penalty length")
    dt: float = Field(..., gt=0.0)
    t_end: float = Field(..., gt=0.0)
    cfl_sigma: float = Field(default=0.5, gt=0.0, le=1.0)
    initial_data: InitialDataSpec = Field(default_factory=ZeroData)
    snapshot_every: int = Field(default=10, ge=1)

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


def check_step_size(dt: float, epsilon: float, grid: RadialGrid, cfl_sigma: float = 0.5) -> None:
    limit = min(cfl_sigma * grid.dr, STIFFNESS_FACTOR * epsilon)
    if dt > limit * (1.0 + 1e-12):
        raise ConfigurationError(
            f"dt={dt} exceeds min(cfl_sigma*dr, {STIFFNESS_FACTOR}*epsilon) = {limit:.6g}",
            details={"dt": dt, "limit": limit, "epsilon": epsilon},
        )


def gl_init(
    phi0_spec,
    phi1_spec,
    v0_spec,
    epsilon: float,
    grid: RadialGrid,
    dt: Optional[float] = None,
) -> GLState:
    """Constrained initial state d = (sin phi0, cos phi0), d_t = phi1 * d_perp."""
    if not epsilon > 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    phi0 = evaluate_profile(phi0_spec, grid, "phi0")
    phi1 = evaluate_profile(phi1_spec, grid, "phi1")
    v0 = evaluate_profile(v0_spec, grid, "v0")
    phi1[-1] = 0.0

    u = np.sin(phi0)
    w = np.cos(phi0)
    u_t = np.cos(phi0) * phi1
    w_t = -np.sin(phi0) * phi1
    step_back = dt or 0.0
    return GLState(
        grid=grid,
        u=RadialField(grid, u),
        w=RadialField(grid, w),
        u_t=RadialField(grid, u_t),
        w_t=RadialField(grid, w_t),
        v=RadialField(grid, v0),
        epsilon=float(epsilon),
        time=0.0,
        u_prev=RadialField(grid, u - step_back * u_t),
        w_prev=RadialField(grid, w - step_back * w_t),
    )


def gl_init_from_spec(spec: InitialDataSpec, epsilon: float, grid: RadialGrid, dt=None) -> GLState:
    return gl_init(spec, spec.phi1, spec.v0, epsilon, grid, dt)


def _penalty_force(u: np.ndarray, w: np.ndarray, epsilon: float) -> np.ndarray:
    return (u * u + w * w - 1.0) / (epsilon * epsilon)


def _fluid_coefficient(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """1/2 + |d|^2/2 averaged to half nodes."""
    d2 = u * u + w * w
    return 0.5 + 0.25 * (d2[1:] + d2[:-1])


def gl_velocity_rhs(state: GLState) -> RadialField:
    """Right side of the reduced v-equation at the current level."""
    grid = state.grid
    u, w = state.u.values, state.w.values
    flux = w * state.u_t.values - u * state.w_t.values
    rhs = grid.variable_laplacian(state.v.values, _fluid_coefficient(u, w)) + grid.divergence(flux)
    return RadialField(grid, rhs)


def director_velocity_rhs(state: FieldState) -> RadialField:
    """Right side of the director v-equation, L v + (1/r)(r phi_t)_r."""
    grid = state.grid
    rhs = grid.laplacian(state.v.values, AxisPolicy.DIRICHLET_ZERO) + grid.divergence(
        state.phi_t.values
    )
    return RadialField(grid, rhs)


def gl_step(state: GLState, dt: float, cfl_sigma: float = 0.5) -> GLState:
    """Advance the reduced GL system by one step."""
    grid = state.grid
    eps = state.epsilon
    check_step_size(dt, eps, grid, cfl_sigma)
    t_next = state.time + dt

    u, w, v = state.u.values, state.w.values, state.v.values
    u_prev, w_prev = state.u_prev.values, state.w_prev.values
    u_rate = (u - u_prev) / dt
    w_rate = (w - w_prev) / dt

    flux = w * u_rate - u * w_rate
    v_new = solve_variable_diffusion(
        grid,
        dt,
        _fluid_coefficient(u, w),
        v + dt * grid.divergence(flux),
        outer_value=v[-1],
    )
    v_r = grid.weighted_gradient(v_new)

    penalty = _penalty_force(u, w, eps)
    source_u = grid.vector_laplacian(u) - penalty * u - v_r * w
    source_w = grid.laplacian(w, AxisPolicy.NEUMANN) - penalty * w + v_r * u

    u_new = leapfrog_update(u, u_prev, source_u, dt, GL_DAMPING)
    w_new = leapfrog_update(w, w_prev, source_w, dt, GL_DAMPING)
    u_new[0] = 0.0
    u_new[-1] = u[-1]
    w_new[-1] = w[-1]

    guard_divergence(t_next, u=u_new, w=w_new, v=v_new)

    return GLState(
        grid=grid,
        u=RadialField(grid, u_new),
        w=RadialField(grid, w_new),
        u_t=RadialField(grid, (3.0 * u_new - 4.0 * u + u_prev) / (2.0 * dt)),
        w_t=RadialField(grid, (3.0 * w_new - 4.0 * w + w_prev) / (2.0 * dt)),
        v=RadialField(grid, v_new),
        epsilon=eps,
        time=t_next,
        u_prev=RadialField(grid, u),
        w_prev=RadialField(grid, w),
        step_index=state.step_index + 1,
    )


def _rotation_defect(grid, u, w, u_t, w_t, v_r):
    """|d_t - omega d|^2 with omega d = (v_r/2)(-w, u)."""
    a = u_t + 0.5 * v_r * w
    b = w_t - 0.5 * v_r * u
    return weighted_norm_sq(grid, a) + weighted_norm_sq(grid, b)


def gl_energy(state: GLState) -> GLEnergy:
    """Energy components of the GL functional and its dissipation rate."""
    grid = state.grid
    u, w = state.u.values, state.w.values
    u_t, w_t = state.u_t.values, state.w_t.values
    u_r = grid.central_derivative(u)
    w_r = grid.central_derivative(w)

    ratio = np.empty_like(u)
    ratio[1:] = (u[1:] / grid.nodes[1:]) ** 2
    ratio[0] = u_r[0] ** 2

    kinetic = 0.5 * grid.integrate(u_t**2 + w_t**2)
    elastic = 0.5 * grid.integrate(u_r**2 + w_r**2 + ratio)
    penalty = grid.integrate((u * u + w * w - 1.0) ** 2) / (4.0 * state.epsilon**2)
    fluid = 0.5 * grid.integrate(state.v.values ** 2)

    v_r = grid.central_derivative(state.v.values)
    dissipation = 0.5 * weighted_norm_sq(grid, v_r) + 2.0 * _rotation_defect(
        grid, u, w, u_t, w_t, v_r
    )
    return GLEnergy(
        kinetic=kinetic,
        elastic=elastic,
        penalty=penalty,
        fluid=fluid,
        total=kinetic + elastic + penalty + fluid,
        dissipation=dissipation,
    )


def gl_scheme_energy(state: GLState, dt: float) -> float:
    """Leapfrog energy between the stored levels (see director.scheme_energy)."""
    grid = state.grid
    eps = state.epsilon
    weights, axis_weights = grid.weights, grid.energy_weights
    u, w = state.u.values, state.w.values
    up, wp = state.u_prev.values, state.w_prev.values

    kinetic = 0.5 * (
        float(np.dot(weights, ((u - up) / dt) ** 2))
        + float(np.dot(axis_weights, ((w - wp) / dt) ** 2))
    )
    elastic = 0.5 * (grid.vector_form(u, up) + grid.gradient_energy(w, wp))

    def potential(a, b):
        return (a * a + b * b - 1.0) ** 2 / (4.0 * eps * eps)

    penalty = 0.5 * float(np.dot(axis_weights, potential(u, w) + potential(up, wp)))
    fluid = 0.5 * weighted_norm_sq(grid, state.v.values)
    return kinetic + elastic + penalty + fluid


def _step_dissipation(old: GLState, new: GLState, dt: float) -> float:
    grid = new.grid
    u_c = (new.u.values - old.u_prev.values) / (2.0 * dt)
    w_c = (new.w.values - old.w_prev.values) / (2.0 * dt)
    v_r = grid.weighted_gradient(new.v.values)
    return 0.5 * weighted_norm_sq(grid, v_r) + 2.0 * _rotation_defect(
        grid, old.u.values, old.w.values, u_c, w_c, v_r
    )


def gl_run(config: GLConfig, grid: RadialGrid) -> GLTrajectory:
    """Integrate the GL system; divergence ends the run with a tagged partial result."""
    check_step_size(config.dt, config.epsilon, grid, config.cfl_sigma)
    activity = config.initial_data.activity(grid)
    if config.t_end > DOMAIN_FRACTION * grid.r_max - activity:
        raise ConfigurationError(
            f"t_end={config.t_end} lets the wave cone reach the outer boundary"
        )

    logger.info(
        f"Starting GL run: epsilon={config.epsilon}, n_cells={grid.n_cells}, "
        f"dt={config.dt}, t_end={config.t_end}"
    )
    dt = config.dt
    state = gl_init_from_spec(config.initial_data, config.epsilon, grid, dt=dt)
    energy = gl_scheme_energy(state, dt)
    trajectory = GLTrajectory(
        grid=grid,
        epsilon=config.epsilon,
        snapshots=[state],
        diagnostics=[GLStepDiagnostics(0.0, energy, 0.0, 0.0, gl_energy(state))],
        dt=dt,
    )

    n_steps = config.n_steps
    with performance_monitor.time_operation("gl_run"):
        for n in range(1, n_steps + 1):
            try:
                new_state = gl_step(state, dt, config.cfl_sigma)
            except DivergenceError as e:
                logger.error(f"GL run stopped: {e}")
                trajectory.failure_time = e.time
                trajectory.failure_message = str(e)
                break
            new_energy = gl_scheme_energy(new_state, dt)
            dissipation = _step_dissipation(state, new_state, dt)
            trajectory.diagnostics.append(
                GLStepDiagnostics(
                    time=new_state.time,
                    discrete_energy=new_energy,
                    dissipation=dissipation,
                    dissipation_residual=new_energy - energy + dt * dissipation,
                    energy=gl_energy(new_state),
                )
            )
            energy = new_energy
            if n % config.snapshot_every == 0 or n == n_steps:
                trajectory.snapshots.append(new_state)
            state = new_state

    logger.info(f"GL run finished at t={state.time:.6g}")
    return trajectory


def extracted_angle(state: GLState) -> np.ndarray:
    return np.arctan2(state.u.values, state.w.values)


def consistency_vs_director(gl_traj: GLTrajectory, dir_traj: Trajectory) -> float:
    """Max over shared snapshots of the L2(r dr) distance of atan2(u, w) and phi.

    Angle differences are taken modulo 2*pi; nodes where |d| vanishes are
    excluded.
    """
    if not gl_traj.grid.same_as(dir_traj.grid):
        raise ComparisonError("GL and director trajectories use different grids")
    gl_times, dir_times = gl_traj.times, dir_traj.times
    if gl_times.shape != dir_times.shape or not np.allclose(gl_times, dir_times, atol=1e-9):
        raise ComparisonError(
            "GL and director trajectories have different snapshot times",
            details={"gl": gl_times.size, "director": dir_times.size},
        )

    grid = gl_traj.grid
    worst = 0.0
    for gl_state, dir_state in zip(gl_traj.snapshots, dir_traj.snapshots):
        modulus = np.sqrt(gl_state.modulus_sq)
        valid = modulus >= DEGENERATE_MODULUS
        excluded = int(np.count_nonzero(~valid))
        if excluded > EXCLUDED_FRACTION_WARNING * grid.size:
            logger.warning(
                f"t={gl_state.time:.4g}: {excluded} of {grid.size} nodes have |d| ~ 0 "
                "and are excluded from the angle comparison"
            )
        diff = extracted_angle(gl_state) - dir_state.phi.values
        diff = np.mod(diff + np.pi, 2.0 * np.pi) - np.pi
        diff[~valid] = 0.0
        worst = max(worst, float(np.sqrt(weighted_norm_sq(grid, diff))))
    return worst
