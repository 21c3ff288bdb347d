"""Camera-induced anisotropic speed field.

Inside the union of camera scopes the adversary fights a fictitious wind
that points away from the destination; its magnitude sums the per-camera
recognition pressure 1/dist**p and is clamped strictly below the base
speed so net progress stays possible everywhere.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import SceneValidationError
from .grid import GridSpec
from .scene import Scene, scope_mask, validate_scene_on_grid


@dataclass(frozen=True)
class WindField:
    """Per-node wind vectors on the solver grid, built for one destination."""

    grid: GridSpec
    vectors: np.ndarray  # (ny, nx, 2)
    destination: tuple[float, float]

    def at(self, x: float, y: float) -> tuple[float, float]:
        """Bilinear wind sample at an arbitrary point (clamped to the grid)."""
        gx, gy = self.grid.to_grid(x, y)
        gx = min(max(gx, 0.0), self.grid.nx - 1.0)
        gy = min(max(gy, 0.0), self.grid.ny - 1.0)
        ix0 = min(int(gx), self.grid.nx - 2)
        iy0 = min(int(gy), self.grid.ny - 2)
        fx = gx - ix0
        fy = gy - iy0
        v = self.vectors
        w00 = v[iy0, ix0]
        w10 = v[iy0, ix0 + 1]
        w01 = v[iy0 + 1, ix0]
        w11 = v[iy0 + 1, ix0 + 1]
        wx = ((1 - fx) * (1 - fy) * w00[0] + fx * (1 - fy) * w10[0]
              + (1 - fx) * fy * w01[0] + fx * fy * w11[0])
        wy = ((1 - fx) * (1 - fy) * w00[1] + fx * (1 - fy) * w10[1]
              + (1 - fx) * fy * w01[1] + fx * fy * w11[1])
        return wx, wy

    def magnitudes(self) -> np.ndarray:
        return np.hypot(self.vectors[..., 0], self.vectors[..., 1])


def build_wind_field(scene: Scene, destination: tuple[float, float],
                     grid: GridSpec, eps_cap: float = 0.05) -> WindField:
    """Assemble the wind field for one destination.

    Per node: zero outside the union of camera scopes; otherwise magnitude
    min(cap, sum over seeing cameras of 1/dist**p) pointing opposite to the
    destination. The cap (1 - eps_cap) * base_speed keeps the net speed
    strictly positive even arbitrarily close to a camera.
    """
    if not (0.0 < eps_cap < 1.0):
        raise SceneValidationError("eps_cap must lie in (0, 1)")
    obstacle_mask = validate_scene_on_grid(scene, grid)
    dx, dy = destination
    if not scene.region.contains(dx, dy):
        raise SceneValidationError("destination lies outside the region")
    dix, diy = grid.nearest_node(dx, dy)
    if obstacle_mask[diy, dix]:
        raise SceneValidationError("destination lies inside an obstacle")

    xs, ys = grid.xy_arrays()
    magnitude = np.zeros((grid.ny, grid.nx))
    for cam in scene.cameras:
        mask = scope_mask(cam, grid, scene.obstacles, obstacle_mask)
        dist = np.hypot(xs - cam.x, ys - cam.y)
        with np.errstate(divide="ignore"):
            contrib = np.where(dist > 0.0,
                               dist ** (-cam.falloff_exponent), np.inf)
        magnitude[mask] += contrib[mask]

    cap = (1.0 - eps_cap) * scene.base_speed
    magnitude = np.minimum(magnitude, cap)

    to_dest_x = dx - xs
    to_dest_y = dy - ys
    norm = np.hypot(to_dest_x, to_dest_y)
    at_dest = norm == 0.0
    safe = np.where(at_dest, 1.0, norm)
    vectors = np.zeros((grid.ny, grid.nx, 2))
    vectors[..., 0] = -magnitude * to_dest_x / safe
    vectors[..., 1] = -magnitude * to_dest_y / safe
    vectors[at_dest] = 0.0

    return WindField(grid=grid, vectors=vectors,
                     destination=(float(dx), float(dy)))


def dump_wind_csv(field: WindField, path) -> None:
    """Debug dump: one (x, y, wx, wy) row per node, row-major."""
    xs, ys = field.grid.xy_arrays()
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["x", "y", "wx", "wy"])
        for iy in range(field.grid.ny):
            for ix in range(field.grid.nx):
                writer.writerow([
                    repr(float(xs[iy, ix])), repr(float(ys[iy, ix])),
                    repr(float(field.vectors[iy, ix, 0])),
                    repr(float(field.vectors[iy, ix, 1])),
                ])
