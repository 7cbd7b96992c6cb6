"""Tests for concentration detection, rescaling and harmonic-profile fits."""

import numpy as np
import pytest

from conftest import make_state
from src.blowup import (
    analyze_blowup,
    detect_blowup,
    directional_energy,
    fit_harmonic_profile,
    harmonic_family,
    rescale_profile,
    select_concentration_radius,
    synth_selfsimilar,
    synthetic_validation,
)
from src.grid.radial_grid import RadialField, build_grid
from src.solvers.director import init_state
from src.solvers.initial_data import HarmonicCapData
from src.utils.validators import ConfigurationError, FitDegenerateError, RangeError

COLLAPSE = 1.0
SYNTHETIC_TIMES = np.arange(100) * 0.01


@pytest.fixture(scope="module")
def collapsing():
    grid = build_grid(5.0, 1600)
    return synth_selfsimilar(lambda t: COLLAPSE - t, grid, SYNTHETIC_TIMES)


@pytest.fixture(scope="module")
def static_map():
    grid = build_grid(10.0, 10000)
    return synth_selfsimilar(lambda t: 1.0, grid, [0.0, 0.1, 0.2])


class TestSelection:
    def test_below_level(self, reference_grid):
        state = make_state(reference_grid, np.zeros(reference_grid.size))
        assert select_concentration_radius(state, 0.5) is None

    def test_level_is_hit(self, reference_grid):
        state = init_state(HarmonicCapData(C=1.0), reference_grid)
        R = select_concentration_radius(state, 0.5)
        assert R is not None
        assert directional_energy(state, 6.0 * R) == pytest.approx(0.5, abs=1e-9)
        # static bubble: D(rho) = 4 rho^2 / (1 + rho^2)
        assert R == pytest.approx(1.0 / (6.0 * np.sqrt(7.0)), rel=1e-3)

    def test_level_must_be_positive(self, reference_grid):
        state = make_state(reference_grid, np.zeros(reference_grid.size))
        with pytest.raises(ConfigurationError):
            select_concentration_radius(state, 0.0)


class TestDetection:
    def test_zero_trajectory(self, zero_run):
        assert detect_blowup(zero_run, 2.0, 0.5) is None

    def test_small_energy_never_flags(self, bump_v_run):
        assert detect_blowup(bump_v_run, 2.0, 0.5) is None

    def test_levels_are_ordered(self, zero_run):
        with pytest.raises(ConfigurationError):
            detect_blowup(zero_run, 1.0, 0.5)

    def test_synthetic_collapse(self, collapsing):
        candidate = detect_blowup(collapsing, 2.0, 0.5)
        assert candidate is not None
        assert candidate.t0 == pytest.approx(COLLAPSE, abs=0.02)
        assert candidate.resolution_limited
        assert len(candidate) == 5
        np.testing.assert_allclose(candidate.times, [0.94, 0.95, 0.96, 0.97, 0.98], atol=1e-12)
        assert np.all(candidate.ratios < 1.0 / 6.0)
        assert np.all(np.diff(candidate.radii) < 0.0)


class TestSynthetic:
    @pytest.mark.parametrize("scale", [0.5, 1.0, 2.0])
    def test_static_bubble_energy(self, scale):
        grid = build_grid(200.0, 20000)
        traj = synth_selfsimilar(lambda t: scale, grid, [0.0])
        assert directional_energy(traj.snapshots[0], grid.r_max) == pytest.approx(4.0, abs=5e-3)

    def test_static_schedule(self, static_map):
        first = static_map.snapshots[0].phi.values
        for state in static_map.snapshots:
            assert np.all(state.phi_t.values == 0.0)
            np.testing.assert_array_equal(state.phi.values, first)
            assert np.all(state.h.values == 0.0)
        assert static_map.synthetic

    def test_core_energy_grows(self, collapsing):
        early = [s for s in collapsing.snapshots if s.time <= 0.9]
        core = [directional_energy(s, 0.5) for s in early]
        assert np.all(np.diff(core) > 0.0)

    def test_schedule_must_shrink(self):
        grid = build_grid(5.0, 500)
        with pytest.raises(ConfigurationError):
            synth_selfsimilar(lambda t: 1.0 + t, grid, [0.0, 0.1])

    def test_schedule_must_stay_positive(self):
        grid = build_grid(5.0, 500)
        with pytest.raises(ConfigurationError):
            synth_selfsimilar(lambda t: 0.5 - t, grid, [0.0, 0.5])

    def test_times_increase(self):
        grid = build_grid(5.0, 500)
        with pytest.raises(ConfigurationError):
            synth_selfsimilar(lambda t: 1.0, grid, [0.2, 0.1])


class TestRescale:
    def test_half_scale(self, static_map):
        comparison = build_grid(20.0, 200)
        phi, h = rescale_profile(static_map, 0.5, 0.1, comparison)
        np.testing.assert_allclose(
            phi.values, 2.0 * np.arctan(comparison.nodes / 2.0), atol=1e-4
        )
        assert np.all(h.values == 0.0)

    def test_reach_checked(self, static_map):
        with pytest.raises(RangeError):
            rescale_profile(static_map, 1.0, 0.1, build_grid(20.0, 200))

    def test_scale_positive(self, static_map):
        with pytest.raises(RangeError):
            rescale_profile(static_map, 0.0, 0.1, build_grid(20.0, 200))

    def test_time_inside_run(self, static_map):
        with pytest.raises(RangeError):
            rescale_profile(static_map, 0.5, 0.5, build_grid(20.0, 200))

    def test_zero_trajectory(self, zero_run):
        phi, h = rescale_profile(zero_run, 0.1, 0.5, build_grid(100.0, 1000))
        assert np.all(phi.values == 0.0)
        assert np.all(h.values == 0.0)


class TestFit:
    def test_exact_family(self):
        grid = build_grid(100.0, 1000)
        profile = RadialField(grid, harmonic_family(grid.nodes, 5.0))
        fit = fit_harmonic_profile(profile, (0.0, 50.0))
        assert fit.C_fit == pytest.approx(5.0, rel=1e-6)
        assert fit.residual_l2 < 1e-6
        assert fit.fit_window == (0.0, 50.0)

    def test_noisy_profile(self):
        grid = build_grid(100.0, 1000)
        rng = np.random.default_rng(7)
        values = harmonic_family(grid.nodes, 3.0) + rng.uniform(-0.01, 0.01, grid.size)
        values[0] = 0.0
        fit = fit_harmonic_profile(RadialField(grid, values), (0.0, 50.0))
        assert fit.C_fit == pytest.approx(3.0, rel=0.02)

    def test_degenerate(self):
        grid = build_grid(100.0, 1000)
        with pytest.raises(FitDegenerateError):
            fit_harmonic_profile(RadialField.zeros(grid), (0.0, 50.0))

    def test_window_inside_grid(self):
        grid = build_grid(100.0, 1000)
        profile = RadialField(grid, harmonic_family(grid.nodes, 5.0))
        with pytest.raises(RangeError):
            fit_harmonic_profile(profile, (0.0, 150.0))


class TestAnalysis:
    def test_no_concentration(self, zero_run):
        assert analyze_blowup(zero_run, 2.0, 0.5) is None

    def test_synthetic_collapse(self, collapsing):
        report = analyze_blowup(collapsing, 2.0, 0.5, window=(0.0, 50.0))
        assert report is not None
        candidate = report.candidate
        truth = (COLLAPSE - candidate.times) / candidate.radii
        np.testing.assert_allclose(report.c_fits, truth, rtol=0.05)
        assert report.fit.C_fit == pytest.approx(truth[-1], rel=0.05)
        assert report.c_variation < 0.01
        assert max(report.h_sup_rescaled) == 0.0
        assert len(report.rescaled_profiles) == len(candidate)
        assert report.resolution_limited

    def test_report_document(self, collapsing):
        document = analyze_blowup(collapsing, 2.0, 0.5, window=(0.0, 50.0)).to_dict()
        assert document["t0"] == pytest.approx(0.99)
        assert len(document["C_fit"]) == len(document["times"]) == 5
        assert document["fit_window"] == [0.0, 50.0]
        assert any("smallest test ball" in note for note in document["notes"])


class TestSyntheticValidation:
    def test_known_collapse_passes(self):
        result = synthetic_validation()
        assert result.valid
        assert result.details["t0"] == pytest.approx(0.99)
        assert result.details["c_variation"] < 0.01

    def test_tolerance_too_tight_fails(self, monkeypatch):
        from src.blowup import analysis

        monkeypatch.setattr(analysis, "SYNTHETIC_C_TOLERANCE", -1.0)
        result = synthetic_validation()
        assert not result.valid
