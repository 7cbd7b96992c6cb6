"""Tests for configuration parsing, the subcommands and the sweep orchestrator."""

import json
from pathlib import Path

import numpy as np
import pytest

from config.settings import settings
from src.cli.commands import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG,
    EXIT_DIVERGED,
    EXIT_OK,
    cmd_analyze,
    cmd_run,
    cmd_sweep,
    cmd_verify,
    expand_sweep,
    synthetic_trajectory,
)
from src.cli.config import load_config, parse_config
from src.cli.main import build_parser, main
from src.cli.serialization import load_trajectory, read_table
from src.cli.sweep import SweepOrchestrator
from src.solvers.director import Formulation, run
from src.utils.validators import ConfigurationError, check_floor

CONFIGS = Path(__file__).parent / "configs"

BUMP = {"kind": "gaussian_bump", "amplitude": 0.5, "center": 2.0, "width": 0.5}


def small_document(**solver):
    """Coarse grid that runs in well under a second."""
    return {
        "grid": {"r_max": 10.0, "n_cells": 100},
        "solver": {"formulation": "v_form", "dt": 0.05, "t_end": 0.5, **solver},
        "output": {"snapshot_every": 2},
    }


def write_config(path: Path, document) -> Path:
    path.write_text(json.dumps(document))
    return path


class TestParseConfig:
    def test_defaults(self):
        config = parse_config(small_document())
        assert config.solver.formulation == Formulation.V_FORM
        assert config.solver.initial_data.kind == "zero"
        assert config.solver.cfl_sigma == 0.5
        assert config.gl is None and config.sweep is None and config.analysis is None
        assert config.diagnostics.taus == [0.2, 0.4, 0.8]
        assert config.output.formats == ["csv", "json"]

    def test_json_text(self):
        config = parse_config(json.dumps(small_document(initial_data=BUMP)))
        assert config.solver.initial_data.amplitude == 0.5

    def test_unknown_keys_are_named(self):
        document = small_document(bogus=1)
        with pytest.raises(ConfigurationError) as info:
            parse_config(document)
        assert info.value.details["unknown_keys"] == ["solver.bogus"]

    def test_not_json(self):
        with pytest.raises(ConfigurationError):
            parse_config("{not json")

    def test_levels_ordered(self):
        document = {**small_document(), "diagnostics": {"epsilon0": 1.0, "epsilon1": 0.5}}
        with pytest.raises(ConfigurationError):
            parse_config(document)

    def test_winding_only_for_sigma_model(self):
        with pytest.raises(ConfigurationError):
            parse_config(small_document(k=2))
        assert parse_config(small_document(formulation="sigma_model", k=2)).solver.k == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            load_config(tmp_path / "absent.json")

    @pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
    def test_shipped_configs_load(self, path):
        assert load_config(path).grid.n_cells > 0


class TestRun:
    def test_zero_data(self, tmp_path):
        config = parse_config(small_document())
        assert cmd_run(config, out=str(tmp_path)) == EXIT_OK
        summary = json.loads((tmp_path / "run_summary.json").read_text())
        assert summary["failed"] is False
        assert summary["final_energy"] == 0.0
        index = read_table(tmp_path / "snapshots" / "index.csv")
        assert list(index["t"]) == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4, 0.5])

    def test_deterministic(self, tmp_path):
        config = parse_config(small_document(initial_data=BUMP))
        first, second = tmp_path / "a", tmp_path / "b"
        cmd_run(config, out=str(first))
        cmd_run(config, out=str(second))
        names = ["diagnostics.csv", "snapshots/index.csv", "snapshots/snapshot_00005.csv"]
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_stored_trajectory_round_trip(self, tmp_path):
        config = parse_config(small_document(initial_data=BUMP))
        traj = run(config.solver_config(), config.grid.build())
        cmd_run(config, out=str(tmp_path))
        loaded = load_trajectory(tmp_path)
        assert loaded.formulation == Formulation.V_FORM
        assert len(loaded.snapshots) == len(traj.snapshots)
        for a, b in zip(traj.snapshots, loaded.snapshots):
            np.testing.assert_array_equal(a.phi.values, b.phi.values)
            np.testing.assert_array_equal(a.v.values, b.v.values)

    def test_divergence_exit(self, tmp_path, monkeypatch):
        monkeypatch.setattr(settings, "divergence_threshold", 1e-3)
        config = parse_config(small_document(formulation="sigma_model", initial_data=BUMP))
        assert cmd_run(config, out=str(tmp_path)) == EXIT_DIVERGED
        summary = json.loads((tmp_path / "run_summary.json").read_text())
        assert summary["failed"] is True


class TestMain:
    def test_parser(self):
        args = build_parser().parse_args(["run", "--config", "c.json"])
        assert args.command == "run"
        assert args.out is None
        assert args.seed == settings.default_seed

    def test_run(self, tmp_path):
        path = write_config(tmp_path / "zero.json", small_document())
        assert main(["run", "--config", str(path), "--out", str(tmp_path / "out")]) == EXIT_OK
        assert (tmp_path / "out" / "trajectory.json").exists()

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG

    def test_invalid_config(self, tmp_path):
        path = write_config(tmp_path / "bad.json", small_document(bogus=True))
        assert main(["verify", "--config", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(["explode", "--config", "c.json"])


VERIFY_CHECKS = {
    "energy_monotonicity",
    "functional_monotonicity",
    "grid_additivity",
    "grid_convergence",
    "h_bound",
    "hv_consistency",
    "local_energy",
    "mms_order",
    "static_solution",
    "sup_h_growth",
    "synthetic_blowup",
    "weak_form",
}


@pytest.mark.parametrize(
    "name", ["bump_h_form.json", "bump_v_form_gl.json", "sigma_model.json"]
)
def test_verify_shipped_configs(name, tmp_path):
    assert cmd_verify(load_config(CONFIGS / name), out=str(tmp_path)) == EXIT_OK
    table = read_table(tmp_path / "verify.csv")
    assert table["passed"].all()
    assert VERIFY_CHECKS <= set(table["check"])


@pytest.mark.parametrize("measured, valid", [(2.0, True), (1.5, True), (1.4, False)])
def test_check_floor(measured, valid):
    result = check_floor("order", measured, 1.5)
    assert result.valid is valid
    assert result.details["limit"] == 1.5


def test_check_floor_rejects_nan():
    assert not check_floor("order", float("nan"), 1.5).valid


class TestAnalyze:
    def test_synthetic_collapse(self, tmp_path):
        config = load_config(CONFIGS / "synthetic_analysis.json")
        assert cmd_analyze(config, out=str(tmp_path)) == EXIT_OK
        report = json.loads((tmp_path / "blowup_report.json").read_text())
        assert report["detected"] is True
        assert report["t0"] == pytest.approx(0.99)
        profiles = read_table(tmp_path / "profiles.csv")
        assert list(profiles.columns) == ["candidate", "r", "phi", "h", "phi_fit"]
        assert profiles["candidate"].nunique() == len(report["C_fit"])

    def test_run_without_concentration(self, tmp_path):
        document = {**small_document(initial_data=BUMP), "analysis": {"source": "run"}}
        assert cmd_analyze(parse_config(document), out=str(tmp_path)) == EXIT_OK
        report = json.loads((tmp_path / "blowup_report.json").read_text())
        assert report == {"detected": False}
        assert (tmp_path / "trajectory.json").exists()

    def test_requires_analysis_section(self, tmp_path):
        with pytest.raises(ConfigurationError):
            cmd_analyze(parse_config(small_document()), out=str(tmp_path))

    def test_noise_is_seeded(self):
        document = json.loads((CONFIGS / "synthetic_analysis.json").read_text())
        document["analysis"]["noise_amplitude"] = 1e-3
        config = parse_config(document)
        a = synthetic_trajectory(config, seed=3).snapshots[-1].phi.values
        b = synthetic_trajectory(config, seed=3).snapshots[-1].phi.values
        c = synthetic_trajectory(config, seed=4).snapshots[-1].phi.values
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)
        assert a[0] == 0.0


class TestSweep:
    def test_expansion_order(self):
        configs = expand_sweep(load_config(CONFIGS / "sweep_bump.json"))
        pairs = [(c.gl.epsilon, c.solver.initial_data.amplitude) for c in configs]
        assert pairs == [(0.1, 0.25), (0.1, 0.5), (0.05, 0.25), (0.05, 0.5)]
        assert all(c.sweep is None for c in configs)

    def test_epsilon_needs_gl(self):
        document = {**small_document(), "sweep": {"epsilon": [0.1]}}
        with pytest.raises(ConfigurationError):
            expand_sweep(parse_config(document))

    def test_amplitude_needs_bump(self):
        document = {**small_document(), "sweep": {"amplitude": [0.1]}}
        with pytest.raises(ConfigurationError):
            expand_sweep(parse_config(document))

    def test_requires_sweep_section(self):
        with pytest.raises(ConfigurationError):
            expand_sweep(parse_config(small_document()))

    @pytest.mark.asyncio
    async def test_orchestrator_keeps_order(self, tmp_path):
        document = {**small_document(initial_data=BUMP), "sweep": {"dt": [0.05, 0.1, 0.025]}}
        configs = expand_sweep(parse_config(document))
        results = await SweepOrchestrator(max_workers=2).run_sweep(configs, tmp_path)
        assert [r["success"] for r in results] == [True, False, True]
        assert [Path(r["directory"]).name for r in results] == ["run_000", "run_001", "run_002"]
        assert "error" in results[1]
        assert (tmp_path / "run_002" / "run_summary.json").exists()

    def test_cmd_sweep(self, tmp_path):
        document = {**small_document(initial_data=BUMP), "sweep": {"amplitude": [0.25, 0.5]}}
        assert cmd_sweep(parse_config(document), out=str(tmp_path)) == EXIT_OK
        table = read_table(tmp_path / "sweep.csv")
        assert list(table["amplitude"]) == [0.25, 0.5]
        assert table["success"].all()

    def test_cmd_sweep_reports_failures(self, tmp_path):
        document = {**small_document(), "sweep": {"dt": [0.05, 0.1]}}
        assert cmd_sweep(parse_config(document), out=str(tmp_path)) == EXIT_CHECK_FAILED
