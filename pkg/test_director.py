"""Tests for the director solver, the h/v transform and manufactured solutions."""

import copy
import dataclasses

import numpy as np
import pytest

from config.settings import settings
from conftest import REFERENCE_DT, bump, reference_run
from src.diagnostics.energy import energy_monotonicity_check, functional_monotonicity_check
from src.grid.radial_grid import RadialField, build_grid
from src.solvers.director import (
    Formulation,
    SolverConfig,
    formulation_difference,
    guard_divergence,
    h_consistency,
    h_from_v,
    init_state,
    initial_acceleration,
    initial_diagnostics,
    run,
    static_drift,
    step,
    v_from_h,
)
from src.solvers.functionals import welss_total
from src.solvers.initial_data import GaussianBumpData, GaussianProfile, HarmonicCapData, ZeroData
from src.solvers.manufactured import convergence_study, default_solution, roundtrip_order
from src.utils.performance import performance_monitor
from src.utils.validators import (
    ComparisonError,
    ConfigurationError,
    ContractViolationError,
    DivergenceError,
)


class TestTransform:
    def test_zero(self):
        grid = build_grid(1.0, 100)
        assert np.all(h_from_v(RadialField.zeros(grid)).values == 0.0)
        assert np.all(v_from_h(RadialField.zeros(grid)).values == 0.0)

    def test_linear_velocity(self):
        grid = build_grid(1.0, 100)
        h = h_from_v(RadialField.from_function(grid, lambda r: r)).values
        np.testing.assert_allclose(h, grid.nodes**2 / 3.0, atol=1e-12)

    def test_closed_form(self):
        grid = build_grid(5.0, 500)
        v = RadialField.from_function(grid, lambda r: 2.0 * r / (1.0 + r * r))
        h = h_from_v(v).values
        r = grid.nodes[1:]
        np.testing.assert_allclose(h[1:], (2.0 * r - 2.0 * np.arctan(r)) / r, atol=1e-4)

    def test_inverse_of_quadratic(self):
        grid = build_grid(1.0, 100)
        v = v_from_h(RadialField.from_function(grid, lambda r: r**2 / 3.0)).values
        np.testing.assert_allclose(v, grid.nodes, atol=1e-10)

    def test_roundtrip_order(self):
        order = roundtrip_order(lambda r: r * np.exp(-r * r), 5.0, [125, 250, 500])
        assert order >= 1.9

    def test_axis_condition(self):
        grid = build_grid(1.0, 100)
        with pytest.raises(ContractViolationError):
            h_from_v(RadialField(grid, np.ones(grid.size)))


class TestInitialData:
    def test_zero_spec(self, reference_grid):
        state = init_state(ZeroData(), reference_grid)
        for name in ("phi", "phi_t", "v", "h"):
            assert np.all(getattr(state, name).values == 0.0)

    def test_harmonic_cap_value(self, reference_grid):
        state = init_state(HarmonicCapData(C=1.0, cutoff=5.0), reference_grid)
        index = int(np.argmin(np.abs(reference_grid.nodes - 1.0)))
        assert state.phi.values[index] == pytest.approx(np.pi / 2, abs=1e-12)

    def test_bump_energy(self, reference_grid):
        state = init_state(bump(), reference_grid)
        energy = welss_total(reference_grid, state.phi.values, state.phi_t.values, state.h.values)
        assert np.isfinite(energy) and energy > 0.0

    def test_without_step_phi_prev_is_phi(self, reference_grid):
        state = init_state(bump(), reference_grid)
        np.testing.assert_array_equal(state.phi_prev.values, state.phi.values)

    @pytest.mark.parametrize("formulation", list(Formulation))
    def test_second_order_taylor_start(self, formulation):
        grid = build_grid(10.0, 500)
        dt = 0.01
        data = GaussianBumpData(
            amplitude=0.3,
            center=2.0,
            width=0.5,
            phi1=GaussianProfile(amplitude=0.2, center=2.0, width=0.5),
            v0=GaussianProfile(amplitude=0.1, center=2.0, width=0.5),
        )
        state = init_state(data, grid, dt=dt, formulation=formulation)
        phi, phi1 = state.phi.values, state.phi_t.values
        acc = initial_acceleration(
            grid, phi, phi1, state.v.values, state.h.values, formulation
        )
        assert acc[0] == 0.0 and acc[-1] == 0.0
        np.testing.assert_allclose(
            state.phi_prev.values, phi - dt * phi1 + 0.5 * dt * dt * acc, atol=1e-15
        )

    def test_acceleration_includes_coupling(self):
        grid = build_grid(10.0, 500)
        r = grid.nodes
        phi = np.zeros(grid.size)
        phi1 = np.zeros(grid.size)
        v = r * np.exp(-r * r)
        h = np.zeros(grid.size)
        acc = initial_acceleration(grid, phi, phi1, v, h, Formulation.V_FORM)
        np.testing.assert_allclose(acc[1:-1], -grid.weighted_gradient(v)[1:-1], atol=1e-15)
        sigma = initial_acceleration(grid, phi, phi1, v, h, Formulation.SIGMA_MODEL)
        assert np.all(sigma == 0.0)

    def test_first_step_matches_exact_acceleration(self):
        # phi1 = 0, so one step lands on phi0 + dt^2 phi_tt(0) / 2
        grid = build_grid(10.0, 500)
        dt = 0.01
        config = SolverConfig(
            formulation=Formulation.SIGMA_MODEL, dt=dt, t_end=1.0, initial_data=bump(0.2)
        )
        state = init_state(config.initial_data, grid, dt=dt, formulation=config.formulation)
        acc = initial_acceleration(
            grid,
            state.phi.values,
            state.phi_t.values,
            state.v.values,
            state.h.values,
            config.formulation,
        )
        new = step(state, config)
        expected = state.phi.values + 0.5 * dt * dt * acc
        np.testing.assert_allclose(new.phi.values, expected, atol=1e-14)
        np.testing.assert_allclose(new.phi_t.values, dt * acc, atol=1e-12)


class TestStep:
    @pytest.mark.parametrize("formulation", list(Formulation))
    def test_zero_is_fixed_point(self, formulation):
        grid = build_grid(10.0, 200)
        config = SolverConfig(formulation=formulation, dt=0.02, t_end=1.0)
        new = step(init_state(ZeroData(), grid, dt=0.02), config)
        assert new.time == pytest.approx(0.02)
        for name in ("phi", "v", "h"):
            assert np.all(getattr(new, name).values == 0.0)

    def test_static_harmonic_map_one_step(self, reference_grid):
        config = SolverConfig(
            formulation=Formulation.V_FORM,
            dt=REFERENCE_DT,
            t_end=1.0,
            initial_data=HarmonicCapData(C=1.0),
        )
        state = init_state(config.initial_data, reference_grid, dt=REFERENCE_DT)
        new = step(state, config)
        assert np.max(np.abs(new.phi.values - state.phi.values)) <= 1e-6

    def test_cfl_enforced(self, reference_grid):
        config = SolverConfig(formulation=Formulation.V_FORM, dt=0.01, t_end=1.0)
        with pytest.raises(ConfigurationError):
            step(init_state(ZeroData(), reference_grid), config)

    def test_guard(self):
        with pytest.raises(DivergenceError) as info:
            guard_divergence(0.5, phi=np.array([0.0, np.nan]))
        assert info.value.time == 0.5


class TestRun:
    def test_zero_data(self, zero_run):
        assert not zero_run.failed
        for state in zero_run.snapshots:
            assert np.all(state.phi.values == 0.0)
            assert np.all(state.v.values == 0.0)

    def test_snapshot_times(self, bump_v_run):
        times = bump_v_run.times
        assert times[0] == 0.0
        assert times[-1] == pytest.approx(1.0)
        np.testing.assert_allclose(np.diff(times), 10 * REFERENCE_DT, rtol=1e-9)

    def test_static_harmonic_map(self, reference_grid):
        assert static_drift(reference_grid, REFERENCE_DT) <= 1e-3

    @pytest.mark.parametrize("fixture", ["bump_h_run", "bump_v_run"])
    def test_energy_dissipation(self, fixture, request):
        traj = request.getfixturevalue(fixture)
        result = energy_monotonicity_check(traj)
        assert result.valid, result.errors

    @pytest.mark.parametrize(
        "fixture, functional", [("bump_h_run", "total_welss"), ("bump_v_run", "total_wels")]
    )
    def test_functional_dissipation(self, fixture, functional, request):
        traj = request.getfixturevalue(fixture)
        slack = settings.energy_slack(traj.dt, traj.grid.dr)
        increments = np.diff(traj.series(functional))
        assert np.max(increments) <= slack
        result = functional_monotonicity_check(traj)
        assert result.valid, result.errors
        assert result.details["functional"] == functional

    @pytest.mark.parametrize("fixture", ["bump_h_run", "bump_v_run"])
    def test_first_step_does_not_gain_energy(self, fixture, request):
        traj = request.getfixturevalue(fixture)
        slack = settings.energy_slack(traj.dt, traj.grid.dr)
        welss = traj.series("total_welss")
        assert welss[1] - welss[0] <= slack

    def test_sigma_model_has_no_dissipated_functional(self, sigma_small_run):
        result = functional_monotonicity_check(sigma_small_run)
        assert result.valid
        assert result.warnings

    def test_functional_increase_is_reported(self, bump_h_run):
        traj = copy.copy(bump_h_run)
        traj.diagnostics = list(bump_h_run.diagnostics)
        traj.diagnostics[5] = dataclasses.replace(
            traj.diagnostics[5], total_welss=traj.diagnostics[4].total_welss + 1e-3
        )
        result = functional_monotonicity_check(traj)
        assert not result.valid
        assert result.details["measured"] == pytest.approx(1e-3)

    def test_formulations_agree(self, bump_h_run, bump_v_run):
        dr = bump_v_run.grid.dr
        assert formulation_difference(bump_h_run, bump_v_run) <= 5.0 * (REFERENCE_DT + dr * dr)

    def test_h_matches_transformed_v(self, bump_h_run, bump_v_run):
        dr = bump_v_run.grid.dr
        worst = h_consistency(bump_v_run, bump_h_run)
        scale = max(float(np.max(np.abs(s.h.values))) for s in bump_h_run.snapshots)
        assert scale > 0.0
        assert worst <= 5.0 * (REFERENCE_DT + dr * dr)

    def test_h_consistency_needs_both_formulations(self, bump_h_run, bump_v_run):
        with pytest.raises(ComparisonError):
            h_consistency(bump_h_run, bump_v_run)

    def test_h_consistency_zero_data(self, zero_run):
        h_run = reference_run(Formulation.H_FORM, ZeroData())
        assert h_consistency(zero_run, h_run) == 0.0

    def test_domain_check(self):
        grid = build_grid(5.0, 500)
        config = SolverConfig(
            formulation=Formulation.V_FORM, dt=0.005, t_end=2.0, initial_data=bump()
        )
        with pytest.raises(ConfigurationError):
            run(config, grid)

    def test_divergence_is_tagged(self, monkeypatch):
        monkeypatch.setattr(settings, "divergence_threshold", 1e-3)
        grid = build_grid(10.0, 200)
        config = SolverConfig(
            formulation=Formulation.SIGMA_MODEL, dt=0.02, t_end=1.0, initial_data=bump(0.5)
        )
        traj = run(config, grid)
        assert traj.failed
        assert traj.failure_time == pytest.approx(0.02)
        assert len(traj.snapshots) == 1


def test_manufactured_convergence():
    report = convergence_study(default_solution(), 20.0, [500, 1000, 2000], 0.0025, 0.5)
    assert report.order_phi >= 1.9
    assert report.order_v >= 1.9


class TestForcedStart:
    @pytest.fixture(scope="class")
    def forced(self):
        grid = build_grid(20.0, 500)
        solution = default_solution()
        config = SolverConfig(
            formulation=Formulation.V_FORM,
            dt=0.01,
            t_end=0.1,
            initial_data=solution.initial_data(grid),
            forcing=solution.forcing(grid),
        )
        return grid, config

    def test_initial_h_t_follows_the_forcing(self, forced):
        # v = t r exp(-r): h_t(0) = (1/r) * integral of s^2 exp(-s) over [0, r]
        grid, config = forced
        state = init_state(
            config.initial_data,
            grid,
            dt=config.dt,
            formulation=config.formulation,
            forcing=config.forcing,
        )
        record = initial_diagnostics(state, config)
        r = grid.nodes[1:]
        exact = (2.0 - np.exp(-r) * (r * r + 2.0 * r + 2.0)) / r
        assert record.sup_ht == pytest.approx(np.max(np.abs(exact)), rel=1e-2)

    def test_run_records_forced_start(self, forced):
        grid, config = forced
        traj = run(config, grid)
        unforced = config.model_copy(update={"forcing": None})
        state = init_state(config.initial_data, grid, dt=config.dt, formulation=config.formulation)
        assert traj.diagnostics[0].sup_ht != initial_diagnostics(state, unforced).sup_ht
        assert traj.diagnostics[0].sup_ht == pytest.approx(0.389, abs=0.005)


def test_run_is_timed():
    performance_monitor.clear()
    grid = build_grid(10.0, 200)
    run(SolverConfig(formulation=Formulation.V_FORM, dt=0.02, t_end=0.2), grid)
    stats = performance_monitor.get_operation_stats("director_run")
    assert stats["count"] == 1
    assert stats["errors"] == 0
    assert stats["avg_time"] == pytest.approx(stats["total_time"])
    assert not hasattr(performance_monitor, "timing_results")
