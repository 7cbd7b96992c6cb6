"""Initial-data library: radial profiles for phi0, phi1 and v0."""

from typing import Annotated, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.grid.radial_grid import RadialGrid
from src.utils.validators import ConfigurationError

# values below this count as "no activity" when sizing the wave cone
ACTIVITY_TOLERANCE = 1e-12


def smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


class _Profile(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    def values(self, grid: RadialGrid) -> np.ndarray:
        raise NotImplementedError

    def activity_radius(self, grid: RadialGrid) -> float:
        """Radius beyond which the profile is static (constant in the PDE sense)."""
        raise NotImplementedError


class ZeroProfile(_Profile):
    kind: Literal["zero"] = "zero"

    def values(self, grid: RadialGrid) -> np.ndarray:
        return np.zeros(grid.size)

    def activity_radius(self, grid: RadialGrid) -> float:
        return 0.0


class GaussianProfile(_Profile):
    """amplitude * exp(-((r - center)/width)^2), axis node pinned to 0."""

    kind: Literal["gaussian_bump"] = "gaussian_bump"
    amplitude: float = Field(..., description="Peak value (radians for phi)")
    center: float = Field(..., ge=0.0)
    width: float = Field(..., gt=0.0)

    def values(self, grid: RadialGrid) -> np.ndarray:
        out = self.amplitude * np.exp(-(((grid.nodes - self.center) / self.width) ** 2))
        out[0] = 0.0
        return out

    def activity_radius(self, grid: RadialGrid) -> float:
        if self.amplitude == 0.0:
            return 0.0
        return self.center + 6.0 * self.width


class HarmonicCapProfile(_Profile):
    """2*arctan(r/C) times a smooth cutoff (1 up to ``cutoff``, 0 past 2*cutoff)."""

    kind: Literal["harmonic_cap"] = "harmonic_cap"
    C: float = Field(..., gt=0.0, description="Bubble scale")
    cutoff: Optional[float] = Field(
        default=None, gt=0.0, description="Cutoff radius; None keeps the map uncut"
    )

    def _is_cut(self, grid: RadialGrid) -> bool:
        return self.cutoff is not None and 2.0 * self.cutoff < grid.r_max

    def values(self, grid: RadialGrid) -> np.ndarray:
        r = grid.nodes
        profile = 2.0 * np.arctan(r / self.C)
        if self._is_cut(grid):
            profile = profile * smooth_step((2.0 * self.cutoff - r) / self.cutoff)
        return profile

    def activity_radius(self, grid: RadialGrid) -> float:
        # an uncut map is stationary, so nothing propagates
        return 2.0 * self.cutoff if self._is_cut(grid) else 0.0


class TableProfile(_Profile):
    kind: Literal["table"] = "table"
    nodes: List[float]
    values_: List[float] = Field(..., alias="values")

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    @model_validator(mode="after")
    def _check_lengths(self):
        if len(self.nodes) != len(self.values_):
            raise ValueError(
                f"table has {len(self.nodes)} nodes but {len(self.values_)} values"
            )
        return self

    def values(self, grid: RadialGrid) -> np.ndarray:
        if len(self.values_) != grid.size:
            raise ConfigurationError(
                f"table has {len(self.values_)} values, grid has {grid.size} nodes",
                details={"table_size": len(self.values_), "grid_size": grid.size},
            )
        nodes = np.asarray(self.nodes, dtype=float)
        if not np.allclose(nodes, grid.nodes, rtol=0.0, atol=1e-9 * grid.r_max):
            raise ConfigurationError("table nodes do not coincide with grid nodes")
        return np.asarray(self.values_, dtype=float)

    def activity_radius(self, grid: RadialGrid) -> float:
        values = self.values(grid)
        active = np.nonzero(np.abs(values - values[-1]) > ACTIVITY_TOLERANCE)[0]
        return float(grid.nodes[active[-1]]) if active.size else 0.0


ProfileSpec = Annotated[
    Union[ZeroProfile, GaussianProfile, HarmonicCapProfile, TableProfile],
    Field(discriminator="kind"),
]


class _Companions(BaseModel):
    """Initial velocity of phi and initial fluid velocity."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    phi1: ProfileSpec = Field(default_factory=ZeroProfile)
    v0: ProfileSpec = Field(default_factory=ZeroProfile)

    def activity(self, grid: RadialGrid) -> float:
        """Largest activity radius over phi0, phi1 and v0."""
        return max(
            self.activity_radius(grid),  # type: ignore[attr-defined]
            self.phi1.activity_radius(grid),
            self.v0.activity_radius(grid),
        )


class ZeroData(_Companions, ZeroProfile):
    pass


class GaussianBumpData(_Companions, GaussianProfile):
    pass


class HarmonicCapData(_Companions, HarmonicCapProfile):
    pass


class TableData(_Companions, TableProfile):
    pass


InitialDataSpec = Annotated[
    Union[ZeroData, GaussianBumpData, HarmonicCapData, TableData],
    Field(discriminator="kind"),
]


def evaluate_profile(profile: _Profile, grid: RadialGrid, label: str) -> np.ndarray:
    """Evaluate a profile and enforce the axis condition f(0) = 0."""
    values = profile.values(grid)
    if abs(values[0]) > ACTIVITY_TOLERANCE:
        raise ConfigurationError(
            f"{label} must vanish on the axis, got {values[0]:.3e}",
            details={"field": label},
        )
    if not np.all(np.isfinite(values)):
        raise ConfigurationError(f"{label} has non-finite values")
    out = values.copy()
    out[0] = 0.0
    return out


def table_profile(grid: RadialGrid, fn) -> TableProfile:
    values = np.asarray(fn(grid.nodes), dtype=float)
    return TableProfile(nodes=grid.nodes.tolist(), values=values.tolist())


def table_from_function(grid: RadialGrid, fn, **companions) -> TableData:
    """Convenience constructor sampling ``fn`` on the grid nodes."""
    values = np.asarray(fn(grid.nodes), dtype=float)
    return TableData(nodes=grid.nodes.tolist(), values=values.tolist(), **companions)
