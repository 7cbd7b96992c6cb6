"""
Time integration of the axisymmetric director system.

Three formulations share one damped leapfrog for the angle phi:
- v_form: fluid velocity v, backward Euler on v_t = L v + (1/r)(r phi_t)_r
- h_form: transformed velocity h, backward Euler on h_t = L_vec h + phi_t
- sigma_model: the undamped, uncoupled k-equivariant wave map
"""

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config.settings import settings
from src.grid.radial_grid import AXIS_TOLERANCE, AxisPolicy, RadialField, RadialGrid
from src.solvers.functionals import (
    h_scheme_energy,
    wave_scheme_energy,
    weighted_norm_sq,
    wels_total,
    welss_total,
)
from src.solvers.implicit import ImplicitDiffusion, OperatorKind
from src.solvers.initial_data import (
    HarmonicCapData,
    InitialDataSpec,
    ZeroData,
    evaluate_profile,
)
from src.utils.logging_config import get_logger
from src.utils.performance import performance_monitor
from src.utils.validators import (
    ComparisonError,
    ConfigurationError,
    ContractViolationError,
    DivergenceError,
)

logger = get_logger(__name__)

# the wave cone must stay inside this fraction of the domain
DOMAIN_FRACTION = 0.8


class Formulation(str, Enum):
    V_FORM = "v_form"
    H_FORM = "h_form"
    SIGMA_MODEL = "sigma_model"


DAMPING = {
    Formulation.V_FORM: 2.0,
    Formulation.H_FORM: 1.0,
    Formulation.SIGMA_MODEL: 0.0,
}


@dataclass(frozen=True)
class Forcing:
    """Manufactured sources: ``phi`` for the angle equation, ``v`` for the
    velocity (v_form) or transformed velocity (h_form) equation."""

    phi: Callable[[float], RadialField]
    v: Callable[[float], RadialField]


class SolverConfig(BaseModel):
    """Time-stepping parameters of one director run."""

    model_config = ConfigDict(extra="forbid", frozen=True, arbitrary_types_allowed=True)

    formulation: Formulation = Field(..., description="v_form, h_form or sigma_model")
    dt: float = Field(..., gt=0.0)
    t_end: float = Field(..., gt=0.0)
    cfl_sigma: float = Field(default=0.5, gt=0.0, le=1.0)
    initial_data: InitialDataSpec = Field(default_factory=ZeroData)
    forcing: Optional[Forcing] = Field(default=None, exclude=True)
    snapshot_every: int = Field(default=10, ge=1)
    k: int = Field(default=1, ge=1, description="Equivariance class of sigma_model")

    @model_validator(mode="after")
    def _check_k(self):
        if self.k != 1 and self.formulation != Formulation.SIGMA_MODEL:
            raise ValueError("k != 1 is only meaningful for sigma_model")
        return self

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))

    @property
    def damping(self) -> float:
        return DAMPING[self.formulation]

    def check_cfl(self, grid: RadialGrid) -> None:
        limit = self.cfl_sigma * grid.dr
        if self.dt > limit * (1.0 + 1e-12):
            raise ConfigurationError(
                f"dt={self.dt} violates CFL bound {limit:.6g} (cfl_sigma*dr)",
                details={"dt": self.dt, "limit": limit},
            )

    def check_domain(self, grid: RadialGrid) -> None:
        activity = self.initial_data.activity(grid)
        reach = DOMAIN_FRACTION * grid.r_max - activity
        if self.t_end > reach:
            raise ConfigurationError(
                f"t_end={self.t_end} lets the wave cone reach the outer boundary "
                f"(allowed {reach:.4g} = {DOMAIN_FRACTION}*r_max - {activity:.4g})",
                details={"t_end": self.t_end, "allowed": reach},
            )


@dataclass(frozen=True, eq=False)
class FieldState:
    """Snapshot of (phi, phi_t, v, h) at one time level."""

    grid: RadialGrid
    phi: RadialField
    phi_t: RadialField
    v: RadialField
    h: RadialField
    time: float
    phi_prev: RadialField
    step_index: int = 0


@dataclass(frozen=True)
class StepDiagnostics:
    """Scalar record after one step (or of the initial state)."""

    time: float
    discrete_energy: float
    dissipation: float
    dissipation_residual: float
    total_welss: float
    total_wels: float
    sup_hr: float
    sup_ht: float
    ht_energy: float


@dataclass(eq=False)
class Trajectory:
    """Snapshots plus per-step diagnostics of one run."""

    grid: RadialGrid
    snapshots: List[FieldState] = field(default_factory=list)
    diagnostics: List[StepDiagnostics] = field(default_factory=list)
    formulation: Optional[Formulation] = None
    dt: Optional[float] = None
    k: int = 1
    failure_time: Optional[float] = None
    failure_message: Optional[str] = None
    synthetic: bool = False

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def failed(self) -> bool:
        return self.failure_time is not None

    def state_at(self, time: float, tolerance: float = 1e-9) -> FieldState:
        times = self.times
        index = int(np.argmin(np.abs(times - time)))
        if abs(times[index] - time) > tolerance * max(1.0, abs(time)):
            raise ComparisonError(f"no snapshot at t={time}")
        return self.snapshots[index]

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(d, name) for d in self.diagnostics])


# ---- h <-> v transform ---------------------------------------------------


def _require_axis_zero(f: RadialField, label: str) -> None:
    if abs(f.values[0]) > AXIS_TOLERANCE:
        raise ContractViolationError(
            f"{label}(0) must vanish, got {f.values[0]:.3e}", details={"field": label}
        )


def h_values_from_v(grid: RadialGrid, v: np.ndarray) -> np.ndarray:
    h = np.zeros_like(v, dtype=float)
    h[1:] = grid.cumulative_radial_integral(v)[1:] / grid.nodes[1:]
    return h


def v_values_from_h(grid: RadialGrid, h: np.ndarray) -> np.ndarray:
    dr = grid.dr
    h_r = np.empty_like(h, dtype=float)
    h_r[1:-1] = (h[2:] - h[:-2]) / (2.0 * dr)
    h_r[-1] = (3.0 * h[-1] - 4.0 * h[-2] + h[-3]) / (2.0 * dr)
    v = np.zeros_like(h, dtype=float)
    v[1:] = h_r[1:] + h[1:] / grid.nodes[1:]
    return v


def h_from_v(v: RadialField) -> RadialField:
    """h(r) = (1/r) * integral of v R dR over [0, r]."""
    _require_axis_zero(v, "v")
    return RadialField(v.grid, h_values_from_v(v.grid, v.values))


def v_from_h(h: RadialField) -> RadialField:
    """v = h_r + h/r, the inverse of ``h_from_v``."""
    _require_axis_zero(h, "h")
    return RadialField(h.grid, v_values_from_h(h.grid, h.values))


# ---- initial state --------------------------------------------------------


def initial_acceleration(
    grid: RadialGrid,
    phi: np.ndarray,
    phi1: np.ndarray,
    v: np.ndarray,
    h: np.ndarray,
    formulation: Formulation,
    k: int = 1,
    forcing: Optional[Forcing] = None,
) -> np.ndarray:
    """phi_tt at t = 0 from the angle equation, with the axis and outer node pinned."""
    f_phi = _forcing_values(forcing.phi if forcing else None, 0.0, grid.size)
    acc = grid.laplacian(phi, AxisPolicy.DIRICHLET_ZERO) - sine_term(grid, phi, k)
    acc = acc - DAMPING[formulation] * phi1 + f_phi
    if formulation == Formulation.V_FORM:
        acc -= grid.weighted_gradient(v)
    elif formulation == Formulation.H_FORM:
        f_flow = _forcing_values(forcing.v if forcing else None, 0.0, grid.size)
        acc -= grid.vector_laplacian(h) + phi1 + f_flow
    acc[0] = 0.0
    acc[-1] = 0.0
    return acc


def init_state(
    spec: InitialDataSpec,
    grid: RadialGrid,
    dt: Optional[float] = None,
    formulation: Formulation = Formulation.SIGMA_MODEL,
    k: int = 1,
    forcing: Optional[Forcing] = None,
) -> FieldState:
    """Populate the t = 0 state.

    With ``dt`` given, phi_prev is the second-order Taylor value
    phi0 - dt*phi1 + dt^2/2*phi_tt(0) for ``formulation``.
    """
    phi = evaluate_profile(spec, grid, "phi0")
    phi1 = evaluate_profile(spec.phi1, grid, "phi1")
    v = evaluate_profile(spec.v0, grid, "v0")
    h = h_values_from_v(grid, v)
    # outer values are held fixed, so the angle is static there
    phi1[-1] = 0.0
    if dt is None:
        phi_prev = phi.copy()
    else:
        acc = initial_acceleration(grid, phi, phi1, v, h, formulation, k, forcing)
        phi_prev = phi - dt * phi1 + 0.5 * dt * dt * acc
    return FieldState(
        grid=grid,
        phi=RadialField(grid, phi),
        phi_t=RadialField(grid, phi1),
        v=RadialField(grid, v),
        h=RadialField(grid, h),
        time=0.0,
        phi_prev=RadialField(grid, phi_prev),
    )


# ---- stepping -------------------------------------------------------------


@lru_cache(maxsize=32)
def _implicit_solver(grid: RadialGrid, dt: float, kind: OperatorKind) -> ImplicitDiffusion:
    return ImplicitDiffusion(grid, dt, kind)


def sine_term(grid: RadialGrid, phi: np.ndarray, k: int = 1) -> np.ndarray:
    """k^2 sin(2 phi)/(2 r^2) at interior nodes."""
    out = np.zeros_like(phi, dtype=float)
    r = grid.nodes[1:-1]
    out[1:-1] = k * k * np.sin(2.0 * phi[1:-1]) / (2.0 * r * r)
    return out


def leapfrog_update(
    phi: np.ndarray, phi_prev: np.ndarray, source: np.ndarray, dt: float, damping: float
) -> np.ndarray:
    """Solve (p+ - 2p + p-)/dt^2 + a (p+ - p-)/(2 dt) = source for p+."""
    half = 0.5 * damping * dt
    return (dt * dt * source + 2.0 * phi - phi_prev + half * phi_prev) / (1.0 + half)


def guard_divergence(time: float, **fields: np.ndarray) -> None:
    threshold = settings.divergence_threshold
    for name, values in fields.items():
        if not np.all(np.isfinite(values)) or np.max(np.abs(values)) > threshold:
            raise DivergenceError(
                f"{name} diverged at t={time:.6g}", time=time, details={"field": name}
            )


def _forcing_values(fn: Optional[Callable[[float], RadialField]], time: float, size: int):
    if fn is None:
        return np.zeros(size)
    return np.asarray(fn(time).values, dtype=float)


def step(state: FieldState, config: SolverConfig) -> FieldState:
    """Advance one time step of size config.dt."""
    grid = state.grid
    config.check_cfl(grid)
    dt = config.dt
    formulation = config.formulation
    t_next = state.time + dt

    phi = state.phi.values
    phi_prev = state.phi_prev.values
    v = state.v.values
    h = state.h.values
    forcing = config.forcing
    f_phi = _forcing_values(forcing.phi if forcing else None, state.time, grid.size)
    f_flow = _forcing_values(forcing.v if forcing else None, t_next, grid.size)

    # phi_t lagged by half a step; feeds the parabolic solve
    phi_rate = (phi - phi_prev) / dt
    source = grid.laplacian(phi, AxisPolicy.DIRICHLET_ZERO) - sine_term(grid, phi, config.k)

    if formulation == Formulation.V_FORM:
        solver = _implicit_solver(grid, dt, OperatorKind.BESSEL_DIRICHLET)
        v_new = solver.solve(v + dt * grid.divergence(phi_rate) + dt * f_flow, outer_value=v[-1])
        source = source - grid.weighted_gradient(v_new)
        h_new = h_values_from_v(grid, v_new)
    elif formulation == Formulation.H_FORM:
        solver = _implicit_solver(grid, dt, OperatorKind.VECTOR)
        h_new = solver.solve(h + dt * phi_rate + dt * f_flow, outer_value=h[-1])
        source = source - (h_new - h) / dt
        v_new = v_values_from_h(grid, h_new)
        v_new[-1] = v[-1]
    else:
        v_new = v.copy()
        h_new = h.copy()

    phi_new = leapfrog_update(phi, phi_prev, source + f_phi, dt, config.damping)
    phi_new[0] = 0.0
    phi_new[-1] = phi[-1]

    guard_divergence(t_next, phi=phi_new, v=v_new, h=h_new)

    phi_t_new = (3.0 * phi_new - 4.0 * phi + phi_prev) / (2.0 * dt)
    return FieldState(
        grid=grid,
        phi=RadialField(grid, phi_new),
        phi_t=RadialField(grid, phi_t_new),
        v=RadialField(grid, v_new),
        h=RadialField(grid, h_new),
        time=t_next,
        phi_prev=RadialField(grid, phi),
        step_index=state.step_index + 1,
    )


# ---- per-step diagnostics -------------------------------------------------


def scheme_energy(state: FieldState, formulation: Formulation, dt: float, k: int = 1) -> float:
    """Discrete energy the scheme dissipates, between levels n-1 and n."""
    grid = state.grid
    energy = wave_scheme_energy(grid, state.phi.values, state.phi_prev.values, dt, k)
    if formulation == Formulation.H_FORM:
        energy += h_scheme_energy(grid, state.h.values)
    elif formulation == Formulation.V_FORM:
        energy += 0.5 * weighted_norm_sq(grid, state.v.values)
    return energy


def dissipation_rate(old: FieldState, new: FieldState, formulation: Formulation, dt: float) -> float:
    """Discrete dissipation over the step old -> new."""
    grid = new.grid
    if formulation == Formulation.SIGMA_MODEL:
        return 0.0
    phi_rate = (new.phi.values - old.phi_prev.values) / (2.0 * dt)
    if formulation == Formulation.H_FORM:
        h_t = (new.h.values - old.h.values) / dt
        return weighted_norm_sq(grid, h_t) + weighted_norm_sq(grid, phi_rate)
    coupled = grid.weighted_gradient(new.v.values) + phi_rate
    return weighted_norm_sq(grid, coupled) + weighted_norm_sq(grid, phi_rate)


def _record(
    state: FieldState,
    discrete_energy: float,
    dissipation: float,
    residual: float,
    h_t: np.ndarray,
    k: int,
) -> StepDiagnostics:
    grid = state.grid
    phi, phi_t = state.phi.values, state.phi_t.values
    h = state.h.values
    return StepDiagnostics(
        time=state.time,
        discrete_energy=discrete_energy,
        dissipation=dissipation,
        dissipation_residual=residual,
        total_welss=welss_total(grid, phi, phi_t, h, k),
        total_wels=wels_total(grid, phi, phi_t, state.v.values, k),
        sup_hr=float(np.max(np.abs(np.diff(h))) / grid.dr),
        sup_ht=float(np.max(np.abs(h_t))),
        ht_energy=weighted_norm_sq(grid, h_t),
    )


def initial_diagnostics(state: FieldState, config: SolverConfig) -> StepDiagnostics:
    """Record of the t = 0 state; h_t comes from the h equation and its forcing."""
    grid = state.grid
    if config.formulation == Formulation.SIGMA_MODEL:
        h_t = np.zeros(grid.size)
    else:
        forcing = config.forcing
        f_flow = _forcing_values(forcing.v if forcing else None, state.time, grid.size)
        if config.formulation == Formulation.V_FORM:
            # the v source enters the h equation through the same transform
            f_flow = h_values_from_v(grid, f_flow)
        h_t = grid.vector_laplacian(state.h.values) + state.phi_t.values + f_flow
    energy = scheme_energy(state, config.formulation, config.dt, config.k)
    return _record(state, energy, 0.0, 0.0, h_t, config.k)


def step_diagnostics(
    old: FieldState, new: FieldState, config: SolverConfig, energy_old: float
) -> StepDiagnostics:
    dt = config.dt
    energy_new = scheme_energy(new, config.formulation, dt, config.k)
    dissipation = dissipation_rate(old, new, config.formulation, dt)
    h_t = (new.h.values - old.h.values) / dt
    residual = energy_new - energy_old + dt * dissipation
    return _record(new, energy_new, dissipation, residual, h_t, config.k)


def run(config: SolverConfig, grid: RadialGrid) -> Trajectory:
    """Integrate to t_end; divergence ends the run with a tagged partial trajectory."""
    config.check_cfl(grid)
    config.check_domain(grid)

    logger.info(
        f"Starting {config.formulation.value} run: r_max={grid.r_max}, "
        f"n_cells={grid.n_cells}, dt={config.dt}, t_end={config.t_end}"
    )
    state = init_state(
        config.initial_data,
        grid,
        dt=config.dt,
        formulation=config.formulation,
        k=config.k,
        forcing=config.forcing,
    )
    trajectory = Trajectory(
        grid=grid,
        snapshots=[state],
        diagnostics=[initial_diagnostics(state, config)],
        formulation=config.formulation,
        dt=config.dt,
        k=config.k,
    )

    n_steps = config.n_steps
    with performance_monitor.time_operation("director_run"):
        for n in range(1, n_steps + 1):
            try:
                new_state = step(state, config)
            except DivergenceError as e:
                logger.error(f"Run stopped: {e}")
                trajectory.failure_time = e.time
                trajectory.failure_message = str(e)
                break
            record = step_diagnostics(
                state, new_state, config, trajectory.diagnostics[-1].discrete_energy
            )
            trajectory.diagnostics.append(record)
            if n % config.snapshot_every == 0 or n == n_steps:
                trajectory.snapshots.append(new_state)
            state = new_state

    if not trajectory.failed:
        final = trajectory.diagnostics[-1]
        logger.info(
            f"Run finished at t={final.time:.6g}: E_welss={final.total_welss:.6g}, "
            f"E_wels={final.total_wels:.6g}"
        )
    return trajectory


def _shared_snapshots(first: Trajectory, second: Trajectory) -> List[Tuple[FieldState, FieldState]]:
    if not first.grid.same_as(second.grid):
        raise ComparisonError("trajectories live on different grids")
    pairs = []
    for state in first.snapshots:
        try:
            pairs.append((state, second.state_at(state.time)))
        except ComparisonError:
            continue
    if not pairs:
        raise ComparisonError("trajectories share no snapshot times")
    return pairs


def formulation_difference(first: Trajectory, second: Trajectory) -> float:
    """Max over shared snapshot times of the L2(r dr) distance of phi."""
    grid = first.grid
    worst = 0.0
    for state, other in _shared_snapshots(first, second):
        diff = state.phi.values - other.phi.values
        worst = max(worst, float(np.sqrt(weighted_norm_sq(grid, diff))))
    return worst


def h_consistency(v_traj: Trajectory, h_traj: Trajectory) -> float:
    """Max over shared snapshot times of |h_from_v(v) - h| between a v_form
    and an independently integrated h_form run."""
    if v_traj.formulation != Formulation.V_FORM or h_traj.formulation != Formulation.H_FORM:
        raise ComparisonError(
            "h/v consistency compares a v_form run with an h_form run",
            details={"first": str(v_traj.formulation), "second": str(h_traj.formulation)},
        )
    grid = v_traj.grid
    worst = 0.0
    for state, other in _shared_snapshots(v_traj, h_traj):
        h_of_v = h_values_from_v(grid, state.v.values)
        worst = max(worst, float(np.max(np.abs(h_of_v - other.h.values))))
    return worst


def static_drift(grid: RadialGrid, dt: float, t_end: float = 1.0) -> float:
    """Max-norm drift of phi for uncut harmonic-map data with v = 0 under v_form."""
    config = SolverConfig(
        formulation=Formulation.V_FORM,
        dt=dt,
        t_end=t_end,
        initial_data=HarmonicCapData(C=1.0),
    )
    traj = run(config, grid)
    first = traj.snapshots[0].phi.values
    return max(float(np.max(np.abs(s.phi.values - first))) for s in traj.snapshots)
