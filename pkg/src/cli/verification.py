"""Property checks run by ``els verify`` against a fresh run.

Trajectory checks read the verified run. Module suites (operator
convergence, static and manufactured solutions, h/v consistency, the
synthetic collapse, weak-form residuals) integrate small companion runs
of their own.
"""

from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from src.blowup.analysis import synthetic_validation
from src.cli.config import RunConfig
from src.diagnostics.cones import (
    boundary_drift,
    cone_reports,
    flux,
    local_energy_monotonicity,
    sup_h_growth_check,
)
from src.diagnostics.energy import (
    energy_monotonicity_check,
    functional_monotonicity_check,
    gl_penalty_check,
    h_bound_trajectory_check,
    pi_half_bound_check,
)
from src.diagnostics.weak_form import BoxTestFunction, weak_form_residuals
from src.grid.radial_grid import RadialField, RadialGrid, additivity_defect, operator_error_ratios
from src.solvers.director import (
    Formulation,
    SolverConfig,
    Trajectory,
    h_consistency,
    run,
    static_drift,
)
from src.solvers.ginzburg_landau import GLTrajectory, consistency_vs_director
from src.solvers.initial_data import GaussianBumpData, GaussianProfile
from src.solvers.manufactured import convergence_study, default_solution
from src.utils.logging_config import get_logger
from src.utils.validators import ValidationError, ValidationResult, check_bound, check_floor

logger = get_logger(__name__)

FLUX_FLOOR = 1e-10
INTEGRAND_FLOOR = 1e-12
LOCAL_ENERGY_TOLERANCE = 1e-6
CONSISTENCY_LIMIT = 0.05
# radius of the inner ball in the local-energy check
LOCAL_ENERGY_RADIUS = 1.0

GRID_ORDER_RATIO = 3.6
ADDITIVITY_TOLERANCE = 1e-12
# static drift limit at dr = 0.01, scaled by (dr/0.01)^2 on coarser grids
STATIC_DRIFT_LIMIT = 1e-3
STATIC_DRIFT_DR = 0.01
HV_CONSISTENCY_FACTOR = 5.0
MMS_ORDER = 1.9
MMS_R_MAX = 20.0
MMS_CELLS = (500, 1000, 2000)
MMS_DT = 0.0025
MMS_T_END = 0.5
WEAK_FORM_T_END = 0.5
WEAK_FORM_TOLERANCE = 1e-2
SMALL_FLOW_AMPLITUDE = 0.05


def _guarded(name: str, check) -> ValidationResult:
    try:
        return check()
    except ValidationError as e:
        result = ValidationResult(valid=False, details={"check": name})
        result.add_error(f"{name}: {e}", e.code)
        return result


def _flux_check(traj: Trajectory, T: float, taus: List[float]) -> ValidationResult:
    worst_flux, worst_integrand = 0.0, 0.0
    for tau in taus:
        report = flux(traj, T, tau)
        worst_flux = max(worst_flux, -report.flux_value)
        worst_integrand = max(worst_integrand, -report.integrand_min)
    result = check_bound("flux_integrand", worst_integrand, INTEGRAND_FLOOR)
    if worst_flux > FLUX_FLOOR:
        result.add_error(f"flux_value: {-worst_flux:.3e} below {-FLUX_FLOOR:.1e}", "BOUND")
    return result


def _local_energy_check(traj: Trajectory, taus: List[float]) -> ValidationResult:
    s = float(traj.times[-1])
    R = LOCAL_ENERGY_RADIUS
    usable = [tau for tau in taus if tau <= s and R + tau <= traj.grid.r_max]
    violations = [local_energy_monotonicity(traj, R + s, R, s, tau) for tau in usable]
    return check_bound(
        "local_energy", max(violations, default=0.0), LOCAL_ENERGY_TOLERANCE, {"taus": usable}
    )


def _cone_check(traj: Trajectory, T: float, lambdas, taus) -> ValidationResult:
    report = cone_reports(traj, T, lambdas, taus)
    negative = min(
        float(np.min(report.annulus_energies["energy"].to_numpy(), initial=0.0)),
        float(np.min(report.phit_cone_avg["average"].to_numpy(), initial=0.0)),
    )
    return check_bound("cone_reports", -negative, 0.0)


def _grid_convergence_check() -> ValidationResult:
    ratios = operator_error_ratios()
    return check_floor("grid_convergence", min(ratios.values()), GRID_ORDER_RATIO, ratios)


def _additivity_check(grid: RadialGrid) -> ValidationResult:
    f = RadialField.from_function(grid, lambda r: np.exp(-r / grid.r_max))
    # cut points in the middle of cells
    a, b, c = ((np.floor(x * grid.n_cells) + 0.5) * grid.dr for x in (0.1, 0.5, 0.9))
    return check_bound("grid_additivity", additivity_defect(f, a, b, c), ADDITIVITY_TOLERANCE)


def _static_check(config: RunConfig, grid: RadialGrid) -> ValidationResult:
    dt = config.solver.dt
    limit = STATIC_DRIFT_LIMIT * max(1.0, (grid.dr / STATIC_DRIFT_DR) ** 2)
    t_end = min(1.0, 0.8 * grid.r_max)
    return check_bound("static_solution", static_drift(grid, dt, t_end), limit, {"t_end": t_end})


def _companion_config(
    config: RunConfig, snapshot_every: Optional[int] = None, **update
) -> SolverConfig:
    """The verified solver section with ``update`` applied."""
    section = config.solver.model_copy(update=update)
    return section.to_solver_config(snapshot_every or config.output.snapshot_every)


def _hv_consistency_check(config: RunConfig, traj: Trajectory) -> ValidationResult:
    if config.solver.k != 1:
        result = ValidationResult(valid=True, details={"check": "hv_consistency"})
        result.add_warning("h/v consistency not applicable for k != 1")
        return result
    grid = traj.grid
    runs = {traj.formulation: traj}
    for formulation in (Formulation.V_FORM, Formulation.H_FORM):
        if formulation not in runs:
            runs[formulation] = run(_companion_config(config, formulation=formulation), grid)
    worst = h_consistency(runs[Formulation.V_FORM], runs[Formulation.H_FORM])
    limit = HV_CONSISTENCY_FACTOR * (config.solver.dt + grid.dr**2)
    return check_bound("hv_consistency", worst, limit)


def _sup_h_check(config: RunConfig, traj: Trajectory) -> ValidationResult:
    """Growth check on the run itself, or on a small-flow companion when h starts at zero."""
    result = sup_h_growth_check(traj)
    if not result.warnings:
        return result
    r_max = traj.grid.r_max
    profile = {"amplitude": SMALL_FLOW_AMPLITUDE, "center": 0.1 * r_max, "width": 0.025 * r_max}
    data = GaussianBumpData(**profile, v0=GaussianProfile(**profile))
    formulation = (
        Formulation.V_FORM if traj.formulation == Formulation.SIGMA_MODEL else traj.formulation
    )
    companion = _companion_config(
        config,
        formulation=formulation,
        initial_data=data,
        t_end=min(config.solver.t_end, 1.0),
        k=1,
    )
    return sup_h_growth_check(run(companion, traj.grid))


def _mms_check() -> ValidationResult:
    report = convergence_study(default_solution(), MMS_R_MAX, MMS_CELLS, MMS_DT, MMS_T_END)
    orders = {"order_phi": report.order_phi, "order_v": report.order_v}
    return check_floor("mms_order", min(orders.values()), MMS_ORDER, orders)


def _weak_form_check(config: RunConfig, traj: Trajectory) -> ValidationResult:
    """Residuals on a densely stored rerun of the verified configuration."""
    grid = traj.grid
    t_end = min(config.solver.t_end, WEAK_FORM_T_END)
    dense = run(_companion_config(config, snapshot_every=1, t_end=t_end), grid)
    box = BoxTestFunction(
        r0=0.05 * grid.r_max, r1=0.15 * grid.r_max, t0=0.2 * t_end, t1=0.8 * t_end
    )
    residuals = weak_form_residuals(dense, box)
    worst = max(residuals.phi_residual, residuals.v_residual)
    return check_bound(
        "weak_form",
        worst,
        WEAK_FORM_TOLERANCE,
        {"phi_residual": residuals.phi_residual, "v_residual": residuals.v_residual},
    )


def run_checks(
    config: RunConfig, traj: Trajectory, gl_traj: Optional[GLTrajectory] = None
) -> Dict[str, ValidationResult]:
    """Evaluate every property check; failures are recorded, never raised."""
    diag = config.diagnostics
    grid = traj.grid
    T = diag.cone_T or float(traj.times[-1])
    taus = [tau for tau in diag.taus if tau <= T]

    suites = {
        "grid_convergence": _grid_convergence_check,
        "grid_additivity": lambda: _additivity_check(grid),
        "energy_monotonicity": lambda: energy_monotonicity_check(traj),
        "functional_monotonicity": lambda: functional_monotonicity_check(traj),
        "h_bound": lambda: h_bound_trajectory_check(traj),
        "boundary_drift": lambda: check_bound("boundary_drift", boundary_drift(traj), 0.0),
        "flux_nonnegativity": lambda: _flux_check(traj, T, taus),
        "local_energy": lambda: _local_energy_check(traj, taus),
        "cone_reports": lambda: _cone_check(traj, T, diag.lambdas, taus),
        "sup_h_growth": lambda: _sup_h_check(config, traj),
        "static_solution": lambda: _static_check(config, grid),
        "hv_consistency": lambda: _hv_consistency_check(config, traj),
        "mms_order": _mms_check,
        "weak_form": lambda: _weak_form_check(config, traj),
        "synthetic_blowup": synthetic_validation,
    }
    if traj.formulation != Formulation.SIGMA_MODEL:
        suites["pi_half_bound"] = lambda: pi_half_bound_check(traj)
    if gl_traj is not None:
        suites["gl_energy_monotonicity"] = lambda: energy_monotonicity_check(gl_traj)
        suites["gl_penalty"] = lambda: gl_penalty_check(gl_traj)
        suites["gl_consistency"] = lambda: check_bound(
            "gl_consistency", consistency_vs_director(gl_traj, traj), CONSISTENCY_LIMIT
        )

    checks = {name: _guarded(name, check) for name, check in suites.items()}
    for name, result in checks.items():
        if result.valid:
            logger.info(f"Check {name}: passed")
        else:
            logger.warning(f"Check {name}: FAILED ({'; '.join(result.errors)})")
    return checks


def checks_frame(checks: Dict[str, ValidationResult]) -> pd.DataFrame:
    rows = []
    for name, result in checks.items():
        rows.append(
            {
                "check": name,
                "passed": bool(result.valid),
                "measured": result.details.get("measured", np.nan),
                "limit": result.details.get("limit", np.nan),
                "message": "; ".join(result.errors + result.warnings),
            }
        )
    return pd.DataFrame(rows, columns=["check", "passed", "measured", "limit", "message"])
