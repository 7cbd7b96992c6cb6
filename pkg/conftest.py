"""Shared fixtures: reference grids and the desk-scale reference runs."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from src.grid.radial_grid import RadialField, build_grid  # noqa: E402
from src.solvers.director import FieldState, Formulation, SolverConfig, run  # noqa: E402
from src.solvers.ginzburg_landau import GLConfig, gl_run  # noqa: E402
from src.solvers.initial_data import GaussianBumpData, ZeroData  # noqa: E402

REFERENCE_R_MAX = 20.0
REFERENCE_CELLS = 2000
REFERENCE_DT = 0.0025
SNAPSHOT_EVERY = 10


def make_state(grid, phi, phi_t=None, v=None, time=0.0) -> FieldState:
    """Hand-built state with h = 0 unless v is given."""
    from src.solvers.director import h_values_from_v

    zeros = np.zeros(grid.size)
    phi_t = zeros if phi_t is None else phi_t
    v = zeros if v is None else v
    phi_field = RadialField(grid, phi)
    return FieldState(
        grid=grid,
        phi=phi_field,
        phi_t=RadialField(grid, phi_t),
        v=RadialField(grid, v),
        h=RadialField(grid, h_values_from_v(grid, v)),
        time=time,
        phi_prev=phi_field,
    )


def bump(amplitude: float = 0.5) -> GaussianBumpData:
    return GaussianBumpData(amplitude=amplitude, center=2.0, width=0.5)


def reference_run(formulation: Formulation, initial_data, t_end: float = 1.0, **kwargs):
    grid = build_grid(REFERENCE_R_MAX, REFERENCE_CELLS)
    config = SolverConfig(
        formulation=formulation,
        dt=REFERENCE_DT,
        t_end=t_end,
        initial_data=initial_data,
        snapshot_every=SNAPSHOT_EVERY,
        **kwargs,
    )
    return run(config, grid)


def reference_gl_run(epsilon: float, initial_data, t_end: float = 1.0):
    grid = build_grid(REFERENCE_R_MAX, REFERENCE_CELLS)
    config = GLConfig(
        epsilon=epsilon,
        dt=REFERENCE_DT,
        t_end=t_end,
        initial_data=initial_data,
        snapshot_every=SNAPSHOT_EVERY,
    )
    return gl_run(config, grid)


@pytest.fixture(scope="session")
def reference_grid():
    return build_grid(REFERENCE_R_MAX, REFERENCE_CELLS)


@pytest.fixture(scope="session")
def bump_h_run():
    return reference_run(Formulation.H_FORM, bump())


@pytest.fixture(scope="session")
def bump_v_run():
    return reference_run(Formulation.V_FORM, bump())


@pytest.fixture(scope="session")
def zero_run():
    return reference_run(Formulation.V_FORM, ZeroData())


@pytest.fixture(scope="session")
def sigma_small_run():
    return reference_run(Formulation.SIGMA_MODEL, bump(0.02))


@pytest.fixture(scope="session")
def gl_run_fine():
    return reference_gl_run(0.05, bump())


@pytest.fixture(scope="session")
def gl_run_coarse():
    return reference_gl_run(0.1, bump())
