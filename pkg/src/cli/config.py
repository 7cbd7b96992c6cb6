"""
Run configuration documents.

A run is described by a JSON object with the sections grid, solver, gl,
diagnostics, output, sweep and analysis. Unknown keys are rejected in every
section.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from config.settings import settings
from src.grid.radial_grid import RadialGrid, build_grid
from src.solvers.director import Formulation, SolverConfig
from src.solvers.ginzburg_landau import GLConfig
from src.solvers.initial_data import InitialDataSpec, ZeroData
from src.utils.logging_config import get_logger
from src.utils.validators import ConfigurationError

logger = get_logger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GridSection(_Section):
    r_max: float = Field(..., gt=0.0, description="Outer radius of the domain")
    n_cells: int = Field(..., ge=8, description="Number of cells")

    def build(self) -> RadialGrid:
        return build_grid(self.r_max, self.n_cells)


class SolverSection(_Section):
    formulation: Formulation = Field(..., description="v_form, h_form or sigma_model")
    dt: float = Field(..., gt=0.0)
    t_end: float = Field(..., gt=0.0)
    cfl_sigma: float = Field(default=0.5, gt=0.0, le=1.0)
    initial_data: InitialDataSpec = Field(default_factory=ZeroData)
    k: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _check_k(self):
        if self.k != 1 and self.formulation != Formulation.SIGMA_MODEL:
            raise ValueError("k != 1 is only meaningful for sigma_model")
        return self

    def to_solver_config(self, snapshot_every: int) -> SolverConfig:
        return SolverConfig(
            formulation=self.formulation,
            dt=self.dt,
            t_end=self.t_end,
            cfl_sigma=self.cfl_sigma,
            initial_data=self.initial_data,
            snapshot_every=snapshot_every,
            k=self.k,
        )


class GLSection(_Section):
    epsilon: float = Field(..., gt=0.0, description="Penalty length")


class DiagnosticsSection(_Section):
    cone_T: Optional[float] = Field(default=None, gt=0.0, description="Cone apex; t_end if unset")
    lambdas: List[float] = Field(default_factory=lambda: [0.25, 0.5, 0.75])
    taus: List[float] = Field(default_factory=lambda: [0.2, 0.4, 0.8])
    epsilon0: float = Field(default=1.0, gt=0.0)
    epsilon1: float = Field(default=0.25, gt=0.0)

    @model_validator(mode="after")
    def _check_levels(self):
        if not 3.0 * self.epsilon1 < self.epsilon0:
            raise ValueError(
                f"3*epsilon1 < epsilon0 is required (epsilon0={self.epsilon0}, "
                f"epsilon1={self.epsilon1})"
            )
        return self


class OutputSection(_Section):
    directory: Optional[str] = Field(default=None, description="Defaults to ELS_OUTPUT_DIR")
    formats: List[Literal["csv", "json"]] = Field(default_factory=lambda: ["csv", "json"])
    snapshot_every: int = Field(default=10, ge=1)

    def resolve(self, override: Optional[str] = None) -> Path:
        return Path(override or self.directory or settings.output_dir)


class SweepSection(_Section):
    epsilon: List[float] = Field(default_factory=list)
    n_cells: List[int] = Field(default_factory=list)
    dt: List[float] = Field(default_factory=list)
    amplitude: List[float] = Field(default_factory=list)


class AnalysisSection(_Section):
    source: Literal["run", "synthetic"] = "synthetic"
    collapse_time: float = Field(default=1.0, gt=0.0)
    snapshot_count: int = Field(default=100, ge=2)
    synthetic_r_max: float = Field(default=5.0, gt=0.0)
    synthetic_n_cells: int = Field(default=1600, ge=8)
    comparison_r_max: float = Field(default=100.0, gt=0.0)
    comparison_n_cells: int = Field(default=1000, ge=8)
    fit_window: Optional[Tuple[float, float]] = None
    n_candidates: int = Field(default=5, ge=1)
    noise_amplitude: float = Field(default=0.0, ge=0.0)


class RunConfig(_Section):
    grid: GridSection
    solver: SolverSection
    gl: Optional[GLSection] = None
    diagnostics: DiagnosticsSection = Field(default_factory=DiagnosticsSection)
    output: OutputSection = Field(default_factory=OutputSection)
    sweep: Optional[SweepSection] = None
    analysis: Optional[AnalysisSection] = None

    def solver_config(self) -> SolverConfig:
        return self.solver.to_solver_config(self.output.snapshot_every)

    def gl_config(self) -> Optional[GLConfig]:
        if self.gl is None:
            return None
        return GLConfig(
            epsilon=self.gl.epsilon,
            dt=self.solver.dt,
            t_end=self.solver.t_end,
            cfl_sigma=self.solver.cfl_sigma,
            initial_data=self.solver.initial_data,
            snapshot_every=self.output.snapshot_every,
        )


def _describe(error: PydanticValidationError) -> str:
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"])
        if item["type"] == "extra_forbidden":
            lines.append(f"unknown key '{location}'")
        else:
            lines.append(f"{location}: {item['msg']}")
    return "; ".join(lines)


def parse_config(text: Union[str, bytes, Dict[str, Any]]) -> RunConfig:
    """Validate a configuration document and apply defaults."""
    if isinstance(text, (str, bytes)):
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"configuration is not valid JSON: {e}") from e
    else:
        document = text
    if not isinstance(document, dict):
        raise ConfigurationError("configuration must be a JSON object")

    try:
        config = RunConfig.model_validate(document)
    except PydanticValidationError as e:
        unknown = [
            ".".join(str(p) for p in item["loc"])
            for item in e.errors()
            if item["type"] == "extra_forbidden"
        ]
        raise ConfigurationError(
            f"invalid configuration: {_describe(e)}",
            details={"unknown_keys": unknown, "errors": e.error_count()},
        ) from e
    logger.debug(f"Parsed configuration: {config.solver.formulation.value}, grid {config.grid}")
    return config


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"configuration file not found: {path}")
    return parse_config(path.read_text(encoding="utf-8"))
