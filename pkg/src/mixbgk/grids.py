"""Uniform phase-space grids and the velocity quadrature used everywhere else.

Velocity integrals use the trapezoid rule on the uniform node set
(full weight dv inside, half weight at the two endpoints).  For Maxwellians
whose support is well inside the domain this is spectrally accurate, so the
half-weights only matter when the distribution actually touches the
truncation boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PERIODIC = "periodic"
FREE_FLOW = "free-flow"
INFLOW_OUTFLOW = "inflow-outflow"
_BC_KINDS = (PERIODIC, FREE_FLOW, INFLOW_OUTFLOW)


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform velocity nodes v_j = v_min + j*dv, j = 0..N_v."""

    v_min: float
    v_max: float
    n_v: int

    def __post_init__(self):
        if not (math.isfinite(self.v_min) and math.isfinite(self.v_max)):
            raise GridError("velocity bounds must be finite")
        if not self.v_min < 0.0 < self.v_max:
            raise GridError("velocity domain must contain 0 strictly inside")
        if self.n_v < 8:
            raise GridError("need at least 8 velocity intervals")

    @property
    def dv(self) -> float:
        return (self.v_max - self.v_min) / self.n_v

    @property
    def nodes(self) -> np.ndarray:
        # j*dv + v_min, not cumulative sums: bitwise reproducible
        return self.v_min + self.dv * np.arange(self.n_v + 1)

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n_v + 1, self.dv)
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @property
    def v_ref(self) -> float:
        """Velocity scale entering the CFL definition."""
        return max(abs(self.v_min), abs(self.v_max))


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform cell-centered spatial grid with a fixed boundary kind."""

    x_min: float
    x_max: float
    n_x: int
    bc: str = PERIODIC

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise GridError("spatial bounds must be finite")
        if not self.x_min < self.x_max:
            raise GridError("empty spatial domain")
        if self.n_x < 4:
            raise GridError("need at least 4 spatial cells")
        if self.bc not in _BC_KINDS:
            raise GridError(f"unknown boundary kind {self.bc!r}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_x

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + self.dx * (np.arange(self.n_x) + 0.5)

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


def make_grids(
    x_min: float,
    x_max: float,
    n_x: int,
    v_min: float,
    v_max: float,
    n_v: int,
    bc: str = PERIODIC,
) -> tuple[SpatialGrid, VelocityGrid]:
    """Build the (space, velocity) grid pair for a run."""
    return SpatialGrid(x_min, x_max, n_x, bc), VelocityGrid(v_min, v_max, n_v)
