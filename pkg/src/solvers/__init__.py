"""Time integration of the director and Ginzburg-Landau systems."""

from .director import (
    FieldState,
    Forcing,
    Formulation,
    SolverConfig,
    StepDiagnostics,
    Trajectory,
    formulation_difference,
    h_from_v,
    init_state,
    run,
    step,
    v_from_h,
)
from .ginzburg_landau import (
    GLConfig,
    GLEnergy,
    GLState,
    GLTrajectory,
    consistency_vs_director,
    gl_energy,
    gl_init,
    gl_run,
    gl_step,
)
from .initial_data import (
    GaussianBumpData,
    HarmonicCapData,
    InitialDataSpec,
    TableData,
    ZeroData,
)

__all__ = [
    "FieldState",
    "Forcing",
    "Formulation",
    "SolverConfig",
    "StepDiagnostics",
    "Trajectory",
    "formulation_difference",
    "h_from_v",
    "init_state",
    "run",
    "step",
    "v_from_h",
    "GLConfig",
    "GLEnergy",
    "GLState",
    "GLTrajectory",
    "consistency_vs_director",
    "gl_energy",
    "gl_init",
    "gl_run",
    "gl_step",
    "GaussianBumpData",
    "HarmonicCapData",
    "InitialDataSpec",
    "TableData",
    "ZeroData",
]
