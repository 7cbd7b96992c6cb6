"""
Subcommand bodies: each takes a validated RunConfig, writes its artifacts
under the output directory and returns a process exit status.
"""

import asyncio
import itertools
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from config.settings import settings
from src.blowup.analysis import SYNTHETIC_C_TOLERANCE, BlowupReport, analyze_blowup
from src.blowup.profiles import harmonic_family
from src.blowup.synthetic import synth_selfsimilar
from src.cli.config import RunConfig, parse_config
from src.cli.serialization import (
    write_gl_trajectory,
    write_json,
    write_table,
    write_trajectory,
)
from src.cli.verification import checks_frame, run_checks
from src.grid.radial_grid import RadialField, build_grid
from src.solvers.director import FieldState, Trajectory, run
from src.solvers.ginzburg_landau import GLTrajectory, gl_run
from src.utils.logging_config import get_logger
from src.utils.performance import performance_monitor
from src.utils.validators import ConfigurationError

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def solve(config: RunConfig) -> Tuple[Trajectory, Optional[GLTrajectory]]:
    """Director run, plus the GL run when the config has a gl section."""
    grid = config.grid.build()
    traj = run(config.solver_config(), grid)
    gl_traj = None
    gl_config = config.gl_config()
    if gl_config is not None:
        gl_traj = gl_run(gl_config, grid)
    return traj, gl_traj


def run_summary(
    config: RunConfig, traj: Trajectory, gl_traj: Optional[GLTrajectory]
) -> Dict[str, Any]:
    final = traj.diagnostics[-1]
    summary = {
        "formulation": config.solver.formulation.value,
        "r_max": config.grid.r_max,
        "n_cells": config.grid.n_cells,
        "dt": config.solver.dt,
        "t_end": config.solver.t_end,
        "initial_data": config.solver.initial_data.kind,
        "failed": traj.failed,
        "failure_time": traj.failure_time,
        "final_time": final.time,
        "final_energy": final.discrete_energy,
        "final_total_welss": final.total_welss,
        "snapshots": len(traj.snapshots),
    }
    if gl_traj is not None:
        summary.update(
            {
                "gl_epsilon": gl_traj.epsilon,
                "gl_failed": gl_traj.failed,
                "gl_final_energy": gl_traj.diagnostics[-1].discrete_energy,
            }
        )
    return summary


def execute_run(config: RunConfig, out_dir: Path) -> Dict[str, Any]:
    """Solve one configuration and write its run directory."""
    out_dir = Path(out_dir)
    traj, gl_traj = solve(config)
    write_trajectory(traj, out_dir, config.output.formats)
    if gl_traj is not None:
        write_gl_trajectory(gl_traj, out_dir)
    summary = run_summary(config, traj, gl_traj)
    write_json(summary, out_dir / "run_summary.json")
    summary["directory"] = str(out_dir)
    return summary


def _diverged(summary: Dict[str, Any]) -> bool:
    return bool(summary.get("failed") or summary.get("gl_failed"))


def cmd_run(config: RunConfig, out: Optional[str] = None, seed: Optional[int] = None) -> int:
    out_dir = config.output.resolve(out)
    summary = execute_run(config, out_dir)
    for operation, stats in performance_monitor.get_operation_stats().items():
        logger.info(f"{operation}: {stats['count']} calls, {stats['avg_time']:.1f} ms average")
    if _diverged(summary):
        logger.error(f"Run diverged at t={summary.get('failure_time')}")
        return EXIT_DIVERGED
    return EXIT_OK


def cmd_verify(config: RunConfig, out: Optional[str] = None, seed: Optional[int] = None) -> int:
    out_dir = config.output.resolve(out)
    traj, gl_traj = solve(config)
    write_trajectory(traj, out_dir, config.output.formats)
    if gl_traj is not None:
        write_gl_trajectory(gl_traj, out_dir)
    if traj.failed or (gl_traj is not None and gl_traj.failed):
        logger.error("Verification run diverged; checks skipped")
        return EXIT_DIVERGED

    checks = run_checks(config, traj, gl_traj)
    table = checks_frame(checks)
    write_table(table, out_dir / "verify.csv")
    failed = table.loc[~table["passed"], "check"].tolist()
    if failed:
        logger.warning(f"{len(failed)} checks failed: {', '.join(failed)}")
        return EXIT_CHECK_FAILED
    logger.info(f"All {len(table)} checks passed")
    return EXIT_OK


def expand_sweep(config: RunConfig) -> List[RunConfig]:
    """Cartesian product over epsilon, n_cells, dt and amplitude, in that order."""
    sweep = config.sweep
    if sweep is None:
        raise ConfigurationError("sweep requires a 'sweep' section")
    if sweep.epsilon and config.gl is None:
        raise ConfigurationError("an epsilon sweep requires a 'gl' section")
    if sweep.amplitude and config.solver.initial_data.kind != "gaussian_bump":
        raise ConfigurationError("an amplitude sweep requires gaussian_bump initial data")

    base = config.model_dump(mode="json")
    base["sweep"] = None
    axes = [
        sweep.epsilon or [None],
        sweep.n_cells or [None],
        sweep.dt or [None],
        sweep.amplitude or [None],
    ]
    configs = []
    for epsilon, n_cells, dt, amplitude in itertools.product(*axes):
        document = {**base, "grid": dict(base["grid"]), "solver": dict(base["solver"])}
        if epsilon is not None:
            document["gl"] = {"epsilon": epsilon}
        if n_cells is not None:
            document["grid"]["n_cells"] = n_cells
        if dt is not None:
            document["solver"]["dt"] = dt
        if amplitude is not None:
            document["solver"]["initial_data"] = {
                **document["solver"]["initial_data"],
                "amplitude": amplitude,
            }
        configs.append(parse_config(document))
    logger.info(f"Sweep expanded to {len(configs)} runs")
    return configs


SWEEP_COLUMNS = [
    "index",
    "directory",
    "epsilon",
    "n_cells",
    "dt",
    "amplitude",
    "success",
    "failed",
    "final_energy",
    "error",
]


def sweep_frame(configs: List[RunConfig], results: List[Dict[str, Any]]) -> pd.DataFrame:
    rows = []
    for index, (config, result) in enumerate(zip(configs, results)):
        rows.append(
            {
                "index": index,
                "directory": Path(result.get("directory", "")).name,
                "epsilon": config.gl.epsilon if config.gl else np.nan,
                "n_cells": config.grid.n_cells,
                "dt": config.solver.dt,
                "amplitude": getattr(config.solver.initial_data, "amplitude", np.nan),
                "success": bool(result.get("success", False)),
                "failed": bool(result.get("failed", False)),
                "final_energy": result.get("final_energy", np.nan),
                "error": result.get("error", ""),
            }
        )
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def cmd_sweep(config: RunConfig, out: Optional[str] = None, seed: Optional[int] = None) -> int:
    from src.cli.sweep import SweepOrchestrator

    out_dir = config.output.resolve(out)
    configs = expand_sweep(config)
    orchestrator = SweepOrchestrator(max_workers=settings.els_threads)
    results = asyncio.run(orchestrator.run_sweep(configs, out_dir))
    table = sweep_frame(configs, results)
    write_table(table, out_dir / "sweep.csv")

    if not table["success"].all():
        return EXIT_CHECK_FAILED
    if table["failed"].any():
        return EXIT_DIVERGED
    return EXIT_OK


def synthetic_trajectory(config: RunConfig, seed: Optional[int] = None) -> Trajectory:
    """Self-similar collapse with lambda(t) = collapse_time - t, optionally perturbed."""
    analysis = config.analysis
    grid = build_grid(analysis.synthetic_r_max, analysis.synthetic_n_cells)
    collapse = analysis.collapse_time
    times = np.arange(analysis.snapshot_count) * collapse / analysis.snapshot_count
    traj = synth_selfsimilar(lambda t: collapse - t, grid, times, k=config.solver.k)
    if analysis.noise_amplitude == 0.0:
        return traj

    rng = np.random.default_rng(settings.default_seed if seed is None else seed)
    noisy = []
    for state in traj.snapshots:
        noise = rng.uniform(-analysis.noise_amplitude, analysis.noise_amplitude, grid.size)
        noise[0] = 0.0
        phi = RadialField(grid, state.phi.values + noise)
        noisy.append(
            FieldState(
                grid=grid,
                phi=phi,
                phi_t=state.phi_t,
                v=state.v,
                h=state.h,
                time=state.time,
                phi_prev=phi,
                step_index=state.step_index,
            )
        )
    traj.snapshots = noisy
    return traj


def profiles_frame(report: BlowupReport) -> pd.DataFrame:
    r = report.comparison_grid.nodes
    frames = []
    for index, ((phi_i, h_i), fit) in enumerate(zip(report.rescaled_profiles, report.fits)):
        frames.append(
            pd.DataFrame(
                {
                    "candidate": index,
                    "r": r,
                    "phi": phi_i.values,
                    "h": h_i.values,
                    "phi_fit": harmonic_family(r, fit.C_fit, fit.k),
                }
            )
        )
    return pd.concat(frames, ignore_index=True)


def _check_synthetic_fit(config: RunConfig, report: BlowupReport) -> bool:
    collapse = config.analysis.collapse_time
    candidate = report.candidate
    truth = (collapse - candidate.times[-1]) / candidate.radii[-1]
    error = abs(report.fit.C_fit - truth) / truth
    logger.info(f"Synthetic ground truth C={truth:.6g}, fitted {report.fit.C_fit:.6g}")
    return error <= SYNTHETIC_C_TOLERANCE


def cmd_analyze(config: RunConfig, out: Optional[str] = None, seed: Optional[int] = None) -> int:
    analysis = config.analysis
    if analysis is None:
        raise ConfigurationError("analyze requires an 'analysis' section")
    out_dir = config.output.resolve(out)

    if analysis.source == "synthetic":
        traj = synthetic_trajectory(config, seed)
    else:
        traj, _ = solve(config)
        write_trajectory(traj, out_dir, config.output.formats)
        if traj.failed:
            logger.warning(f"Analyzing a run that stopped at t={traj.failure_time}")

    report = analyze_blowup(
        traj,
        epsilon0=config.diagnostics.epsilon0,
        epsilon1=config.diagnostics.epsilon1,
        comparison_grid=build_grid(analysis.comparison_r_max, analysis.comparison_n_cells),
        window=analysis.fit_window,
        n_candidates=analysis.n_candidates,
    )
    if report is None:
        logger.info("No energy concentration detected")
        write_json({"detected": False}, out_dir / "blowup_report.json")
        return EXIT_OK

    write_json({"detected": True, **report.to_dict()}, out_dir / "blowup_report.json")
    write_table(profiles_frame(report), out_dir / "profiles.csv")
    if analysis.source == "synthetic" and not _check_synthetic_fit(config, report):
        return EXIT_CHECK_FAILED
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "analyze": cmd_analyze,
}
