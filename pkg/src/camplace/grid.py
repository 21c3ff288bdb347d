"""Regular solver grid: node lattice with square spacing covering a region."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SceneValidationError


@dataclass(frozen=True)
class GridSpec:
    """nx-by-ny node lattice, spacing ``h``, node (0, 0) at ``origin``."""

    nx: int
    ny: int
    h: float
    origin: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise SceneValidationError("grid needs at least 2 nodes per axis")
        if not (self.h > 0.0):
            raise SceneValidationError("grid spacing h must be positive")

    @classmethod
    def from_region(cls, region, nx: int, ny: int) -> "GridSpec":
        """Grid covering ``region`` exactly; spacing must come out square."""
        if nx < 2 or ny < 2:
            raise SceneValidationError("grid needs at least 2 nodes per axis")
        hx = (region.x_max - region.x_min) / (nx - 1)
        hy = (region.y_max - region.y_min) / (ny - 1)
        if abs(hx - hy) > 1e-9 * max(hx, hy):
            raise SceneValidationError(
                f"grid {nx}x{ny} does not cover the region with square "
                f"spacing (hx={hx:.6g}, hy={hy:.6g})"
            )
        return cls(nx=nx, ny=ny, h=hx, origin=(region.x_min, region.y_min))

    @property
    def n_nodes(self) -> int:
        return self.nx * self.ny

    def node_xy(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.origin[0] + ix * self.h, self.origin[1] + iy * self.h)

    def xy_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinates as (ny, nx) arrays."""
        xs = self.origin[0] + self.h * np.arange(self.nx)
        ys = self.origin[1] + self.h * np.arange(self.ny)
        return np.meshgrid(xs, ys)

    def to_grid(self, x: float, y: float) -> tuple[float, float]:
        """Continuous grid coordinates (node units)."""
        return ((x - self.origin[0]) / self.h, (y - self.origin[1]) / self.h)

    def nearest_node(self, x: float, y: float) -> tuple[int, int]:
        gx, gy = self.to_grid(x, y)
        ix = min(max(int(math.floor(gx + 0.5)), 0), self.nx - 1)
        iy = min(max(int(math.floor(gy + 0.5)), 0), self.ny - 1)
        return ix, iy

    def flat(self, ix: int, iy: int) -> int:
        return iy * self.nx + ix

    def unflat(self, idx: int) -> tuple[int, int]:
        return idx % self.nx, idx // self.nx

    def covers_point(self, x: float, y: float, tol: float = 1e-9) -> bool:
        """Point lies within the node lattice extent (with a small slack)."""
        gx, gy = self.to_grid(x, y)
        return (-tol <= gx <= self.nx - 1 + tol
                and -tol <= gy <= self.ny - 1 + tol)

    def covers(self, region, tol: float = 1e-9) -> bool:
        x1 = self.origin[0] + (self.nx - 1) * self.h
        y1 = self.origin[1] + (self.ny - 1) * self.h
        scale = max(abs(region.x_max - region.x_min),
                    abs(region.y_max - region.y_min), 1.0)
        return (
            abs(self.origin[0] - region.x_min) <= tol * scale
            and abs(self.origin[1] - region.y_min) <= tol * scale
            and abs(x1 - region.x_max) <= tol * scale
            and abs(y1 - region.y_max) <= tol * scale
        )
