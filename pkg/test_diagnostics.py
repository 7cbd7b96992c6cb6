"""Tests for energy reports, cone diagnostics and weak-form residuals."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from conftest import REFERENCE_DT, bump, make_state, reference_run
from src.diagnostics.cones import (
    boundary_drift,
    cone_reports,
    flux,
    local_energy_at,
    local_energy_monotonicity,
    sup_h_growth,
    sup_h_growth_check,
    sup_norms_h,
)
from src.diagnostics.energy import (
    H_of_phi,
    energy_report,
    h_bound_check,
    h_bound_trajectory_check,
    pi_half_bound_check,
)
from src.diagnostics.weak_form import BoxTestFunction, weak_form_residuals
from src.grid.radial_grid import build_grid
from src.solvers.director import Formulation, SolverConfig, init_state, run
from src.solvers.initial_data import GaussianBumpData, GaussianProfile, table_from_function
from src.utils.validators import RangeError, ResolutionError


class TestEnergyReport:
    def test_zero_state(self, reference_grid):
        report = energy_report(make_state(reference_grid, np.zeros(reference_grid.size)))
        assert report.total_welss == 0.0
        assert np.all(report.e_field.values == 0.0)
        assert report.E_of_R(5.0) == 0.0

    def test_harmonic_map_threshold(self):
        grid = build_grid(200.0, 20000)
        report = energy_report(make_state(grid, 2.0 * np.arctan(grid.nodes)))
        assert report.directional_energy(grid.r_max) == pytest.approx(4.0, abs=1e-3)
        assert report.threshold_energy == pytest.approx(4.0, abs=1e-3)

    def test_closed_form_total(self):
        grid = build_grid(20.0, 2000)
        report = energy_report(make_state(grid, grid.nodes * np.exp(-grid.nodes)))

        def density(r):
            phi = r * np.exp(-r)
            phi_r = (1.0 - r) * np.exp(-r)
            return (0.5 * phi_r**2 + 0.5 * np.sin(phi) ** 2 / r**2) * r

        exact, _ = quad(density, 0.0, 20.0, limit=200)
        assert report.E_of_R(20.0) == pytest.approx(exact, abs=1e-4)
        assert report.total_welss == pytest.approx(exact, abs=1e-4)

    def test_radius_out_of_range(self, reference_grid):
        report = energy_report(make_state(reference_grid, np.zeros(reference_grid.size)))
        with pytest.raises(RangeError):
            report.E_of_R(25.0)


class TestHBound:
    def test_H_values(self):
        np.testing.assert_allclose(
            H_of_phi(np.array([0.0, np.pi / 2, np.pi, -np.pi / 2, 2 * np.pi])),
            [0.0, 1.0, 2.0, -1.0, 4.0],
            atol=1e-14,
        )

    def test_zero_state(self, reference_grid):
        assert h_bound_check(make_state(reference_grid, np.zeros(reference_grid.size))) == 0.0

    def test_small_bump(self, reference_grid):
        assert h_bound_check(init_state(bump(0.1), reference_grid)) <= 1e-12

    def test_plateau(self, reference_grid):
        phi = 0.5 * np.pi * (1.0 - np.exp(-(reference_grid.nodes**2)))
        assert h_bound_check(make_state(reference_grid, phi)) <= 1e-8

    @pytest.mark.parametrize("fixture", ["bump_h_run", "bump_v_run"])
    def test_reference_runs(self, fixture, request):
        result = h_bound_trajectory_check(request.getfixturevalue(fixture))
        assert result.valid, result.errors


def test_pi_half_bound(reference_grid):
    def excess(amplitude: float) -> float:
        return energy_report(init_state(bump(amplitude), reference_grid)).threshold_energy - 3.5

    amplitude = brentq(excess, 0.3, 1.5, xtol=1e-10)
    traj = reference_run(Formulation.H_FORM, bump(amplitude))
    result = pi_half_bound_check(traj)
    assert result.valid, result.errors
    assert not result.warnings
    assert result.details["threshold_energy"] == pytest.approx(3.5, abs=1e-6)


class TestFlux:
    def test_zero_trajectory(self, zero_run):
        report = flux(zero_run, 1.0, 0.5)
        assert report.flux_value == 0.0
        assert report.integrand_min == 0.0

    @pytest.mark.parametrize("fixture", ["bump_h_run", "bump_v_run"])
    def test_non_negative(self, fixture, request):
        traj = request.getfixturevalue(fixture)
        for tau in (0.2, 0.4, 0.8):
            report = flux(traj, 1.0, tau)
            assert report.flux_value >= -1e-10
            assert report.integrand_min >= -1e-12

    def test_vanishes_with_tau(self, bump_v_run):
        taus = [0.8, 0.4, 0.2, 0.1, 0.05, REFERENCE_DT]
        values = [flux(bump_v_run, 1.0, tau).flux_value for tau in taus]
        assert all(a >= b for a, b in zip(values, values[1:]))
        initial = bump_v_run.diagnostics[0].total_welss
        assert values[-1] < 0.05 * initial

    def test_window_must_be_covered(self, bump_v_run):
        with pytest.raises(RangeError):
            flux(bump_v_run, 1.5, 0.2)


class TestLocalEnergy:
    def test_zero_trajectory(self, zero_run):
        assert local_energy_monotonicity(zero_run, 2.5, 1.5, 1.0, 0.5) == 0.0

    @pytest.mark.parametrize("fixture", ["bump_h_run", "bump_v_run"])
    @pytest.mark.parametrize("tau", [0.2, 0.5])
    def test_bump_runs(self, fixture, tau, request):
        traj = request.getfixturevalue(fixture)
        assert local_energy_monotonicity(traj, 2.5, 1.5, 1.0, tau) <= 1e-6

    @pytest.mark.parametrize("tau", [0.2, 0.5])
    def test_sigma_model_without_flow(self, sigma_small_run, tau):
        violation = local_energy_monotonicity(sigma_small_run, 2.5, 1.5, 1.0, tau, c_test=0.0)
        assert violation <= 1e-6

    def test_apex_must_match(self, bump_v_run):
        with pytest.raises(RangeError):
            local_energy_monotonicity(bump_v_run, 3.0, 1.5, 1.0, 0.2)

    def test_energy_inside_grows_with_radius(self, bump_v_run):
        values = [local_energy_at(bump_v_run, R, 0.5) for R in (1.0, 2.0, 3.0, 6.0)]
        assert all(a <= b for a, b in zip(values, values[1:]))


class TestConeReports:
    @pytest.fixture(scope="class")
    def small_table_run(self):
        grid = build_grid(20.0, 2000)
        data = table_from_function(grid, lambda r: 0.5 * r * np.exp(-r * r))
        config = SolverConfig(
            formulation=Formulation.H_FORM,
            dt=REFERENCE_DT,
            t_end=0.5,
            initial_data=data,
            snapshot_every=10,
        )
        return run(config, grid)

    def test_annulus_energy_decreases_toward_apex(self, small_table_run):
        report = cone_reports(small_table_run, 0.5, [0.5], [0.25, 0.5])
        energies = report.annulus_energies.query("lam == 0.5")["energy"].to_numpy()
        assert energies[-1] < energies[0]
        tail = energies[-6:]
        assert np.all(np.diff(tail) < 0.0)

    def test_cone_averages_non_negative(self, small_table_run):
        report = cone_reports(small_table_run, 0.5, [0.25, 0.75], [0.25, 0.5])
        assert (report.phit_cone_avg["average"] >= 0.0).all()
        assert (report.annulus_energies["energy"] >= 0.0).all()
        assert list(report.phit_cone_avg["tau"]) == [0.25, 0.5]

    def test_resolution_required(self, small_table_run):
        with pytest.raises(ResolutionError):
            cone_reports(small_table_run, 0.5, [0.5], [0.05])

    def test_lambda_range(self, small_table_run):
        with pytest.raises(RangeError):
            cone_reports(small_table_run, 0.5, [1.5], [0.25])


class TestSupHGrowth:
    @pytest.fixture(scope="class", params=[Formulation.H_FORM, Formulation.V_FORM])
    def small_flow_run(self, request):
        profile = {"amplitude": 0.05, "center": 2.0, "width": 0.5}
        data = GaussianBumpData(**profile, v0=GaussianProfile(**profile))
        return reference_run(request.param, data)

    def test_small_flow_stays_bounded(self, small_flow_run):
        first = small_flow_run.diagnostics[0]
        assert first.sup_hr > 0.0
        assert first.sup_ht > 0.0
        assert 2.0 * first.total_welss < 4.0
        assert small_flow_run.series("sup_hr").max() <= 10.0 * first.sup_hr
        assert small_flow_run.series("sup_ht").max() <= 10.0 * first.sup_ht
        assert max(sup_h_growth(small_flow_run)) <= 10.0

    def test_check_passes(self, small_flow_run):
        result = sup_h_growth_check(small_flow_run)
        assert result.valid
        assert not result.warnings

    def test_zero_initial_h_is_not_applicable(self, bump_v_run):
        assert sup_h_growth(bump_v_run)[0] == float("inf")
        result = sup_h_growth_check(bump_v_run)
        assert result.valid
        assert result.warnings


class TestBoundaries:
    def test_zero_trajectory(self, zero_run):
        assert boundary_drift(zero_run) == 0.0
        assert sup_norms_h(zero_run) == (0.0, 0.0)

    @pytest.mark.parametrize("fixture", ["bump_h_run", "bump_v_run", "sigma_small_run"])
    def test_reference_runs(self, fixture, request):
        assert boundary_drift(request.getfixturevalue(fixture)) == 0.0


def test_weak_form_residuals():
    grid = build_grid(10.0, 1000)
    config = SolverConfig(
        formulation=Formulation.V_FORM,
        dt=0.005,
        t_end=0.5,
        initial_data=bump(),
        snapshot_every=1,
    )
    traj = run(config, grid)
    residuals = weak_form_residuals(traj, BoxTestFunction(r0=1.0, r1=3.0, t0=0.1, t1=0.4))
    assert residuals.phi_residual < 1e-2
    assert residuals.v_residual < 1e-2
