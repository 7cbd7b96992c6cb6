"""Energy, cone and weak-form diagnostics computed from trajectories."""

from .cones import (
    ConeReport,
    FluxReport,
    boundary_drift,
    cone_reports,
    flux,
    local_energy_monotonicity,
    sup_h_growth,
    sup_h_growth_check,
    sup_norms_h,
)
from .energy import (
    EnergyReport,
    energy_monotonicity_check,
    energy_report,
    functional_monotonicity_check,
    gl_penalty_check,
    h_bound_check,
    ht_energy_series,
    pi_half_bound_check,
    staggered_local_energy,
)
from .weak_form import BoxTestFunction, WeakFormResiduals, weak_form_residuals

__all__ = [
    "ConeReport",
    "FluxReport",
    "boundary_drift",
    "cone_reports",
    "flux",
    "local_energy_monotonicity",
    "sup_h_growth",
    "sup_h_growth_check",
    "sup_norms_h",
    "EnergyReport",
    "energy_monotonicity_check",
    "energy_report",
    "functional_monotonicity_check",
    "gl_penalty_check",
    "h_bound_check",
    "ht_energy_series",
    "pi_half_bound_check",
    "staggered_local_energy",
    "BoxTestFunction",
    "WeakFormResiduals",
    "weak_form_residuals",
]
