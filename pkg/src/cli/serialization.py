"""
CSV and JSON artifacts of runs.

Layout of a run directory:

    trajectory.json          grid, formulation, dt, k and failure tag
    snapshots/index.csv      index, t, file
    snapshots/snapshot_NNNNN.csv   r, phi, phi_t, v, h
    diagnostics.csv          t, E_total_welss, E_total_wels, dissipation_residual, sup_hr, sup_ht
    gl_diagnostics.csv       t, discrete_energy, kinetic, elastic, penalty, fluid, total,
                             dissipation_residual   (runs with a gl section)

Numbers are written with 17 significant digits and read back with the
round-trip float parser, so reloaded fields are bit-identical.
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, Union

import numpy as np
import pandas as pd

from src.grid.radial_grid import RadialField, build_grid
from src.solvers.director import FieldState, Formulation, Trajectory
from src.solvers.ginzburg_landau import GLTrajectory
from src.utils.logging_config import get_logger
from src.utils.validators import ContractViolationError

logger = get_logger(__name__)

FLOAT_FORMAT = "%.17g"
SNAPSHOT_COLUMNS = ["r", "phi", "phi_t", "v", "h"]
DIAGNOSTIC_COLUMNS = [
    "t",
    "E_total_welss",
    "E_total_wels",
    "dissipation_residual",
    "sup_hr",
    "sup_ht",
]
GL_COLUMNS = [
    "t",
    "discrete_energy",
    "kinetic",
    "elastic",
    "penalty",
    "fluid",
    "total",
    "dissipation_residual",
]


def write_table(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_table(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def write_json(data: Dict[str, Any], path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def snapshot_frame(state: FieldState) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "r": state.grid.nodes,
            "phi": state.phi.values,
            "phi_t": state.phi_t.values,
            "v": state.v.values,
            "h": state.h.values,
        },
        columns=SNAPSHOT_COLUMNS,
    )


def diagnostics_frame(traj: Trajectory) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "t": traj.series("time"),
            "E_total_welss": traj.series("total_welss"),
            "E_total_wels": traj.series("total_wels"),
            "dissipation_residual": traj.series("dissipation_residual"),
            "sup_hr": traj.series("sup_hr"),
            "sup_ht": traj.series("sup_ht"),
        },
        columns=DIAGNOSTIC_COLUMNS,
    )


def gl_diagnostics_frame(traj: GLTrajectory) -> pd.DataFrame:
    data = {"t": traj.series("time")}
    for name in GL_COLUMNS[1:]:
        data[name] = traj.series(name)
    return pd.DataFrame(data, columns=GL_COLUMNS)


def trajectory_metadata(traj: Trajectory) -> Dict[str, Any]:
    return {
        "r_max": traj.grid.r_max,
        "n_cells": traj.grid.n_cells,
        "formulation": traj.formulation.value if traj.formulation else None,
        "dt": traj.dt,
        "k": traj.k,
        "synthetic": traj.synthetic,
        "failure_time": traj.failure_time,
        "failure_message": traj.failure_message,
    }


def write_trajectory(
    traj: Trajectory, directory: Union[str, Path], formats: Iterable[str] = ("csv", "json")
) -> Path:
    directory = Path(directory)
    formats = set(formats)
    directory.mkdir(parents=True, exist_ok=True)
    write_json(trajectory_metadata(traj), directory / "trajectory.json")

    if "csv" in formats:
        rows = []
        for index, state in enumerate(traj.snapshots):
            name = f"snapshot_{index:05d}.csv"
            write_table(snapshot_frame(state), directory / "snapshots" / name)
            rows.append({"index": index, "t": state.time, "file": name})
        write_table(
            pd.DataFrame(rows, columns=["index", "t", "file"]),
            directory / "snapshots" / "index.csv",
        )
        if traj.diagnostics:
            write_table(diagnostics_frame(traj), directory / "diagnostics.csv")
    logger.info(f"Wrote {len(traj.snapshots)} snapshots to {directory}")
    return directory


def write_gl_trajectory(traj: GLTrajectory, directory: Union[str, Path]) -> Path:
    path = write_table(gl_diagnostics_frame(traj), Path(directory) / "gl_diagnostics.csv")
    logger.info(f"Wrote GL diagnostics to {path}")
    return path


def load_trajectory(directory: Union[str, Path]) -> Trajectory:
    """Rebuild the snapshots of a run directory; per-step records are not restored."""
    directory = Path(directory)
    meta_path = directory / "trajectory.json"
    index_path = directory / "snapshots" / "index.csv"
    if not meta_path.exists() or not index_path.exists():
        raise ContractViolationError(f"{directory} does not hold a stored trajectory")

    meta = json.loads(meta_path.read_text())
    grid = build_grid(meta["r_max"], meta["n_cells"])
    index = read_table(index_path)

    snapshots = []
    for _, row in index.iterrows():
        frame = read_table(directory / "snapshots" / row["file"])
        if list(frame.columns) != SNAPSHOT_COLUMNS or len(frame) != grid.size:
            raise ContractViolationError(f"snapshot {row['file']} does not match the grid")
        if not np.allclose(frame["r"].to_numpy(), grid.nodes, rtol=0.0, atol=1e-12 * grid.r_max):
            raise ContractViolationError(f"snapshot {row['file']} has shifted nodes")
        phi = RadialField(grid, frame["phi"].to_numpy())
        snapshots.append(
            FieldState(
                grid=grid,
                phi=phi,
                phi_t=RadialField(grid, frame["phi_t"].to_numpy()),
                v=RadialField(grid, frame["v"].to_numpy()),
                h=RadialField(grid, frame["h"].to_numpy()),
                time=float(row["t"]),
                phi_prev=phi,
                step_index=int(row["index"]),
            )
        )

    formulation = meta.get("formulation")
    return Trajectory(
        grid=grid,
        snapshots=snapshots,
        formulation=Formulation(formulation) if formulation else None,
        dt=meta.get("dt"),
        k=int(meta.get("k", 1)),
        failure_time=meta.get("failure_time"),
        failure_message=meta.get("failure_message"),
        synthetic=bool(meta.get("synthetic", False)),
    )
