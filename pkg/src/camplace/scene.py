"""World model: region, obstacles, directional cameras, and visibility.

Angles follow one convention everywhere: bearings are measured clockwise
from north (the +y axis), in radians, normalized to [0, 2*pi). A camera
watches the closed angular wedge [beta, beta + alpha] from its first ray,
limited by line-of-sight: the open segment from the camera to the query
point must not cross an obstacle cell of the solver grid (supercover
rasterization, endpoints excluded).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .errors import SceneValidationError
from .grid import GridSpec

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Axis-aligned rectangular world bounds."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise SceneValidationError(
                "region requires x_min < x_max and y_min < y_max"
            )

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class Obstacle:
    """Impassable, sight-blocking area.

    One of three forms: an explicit set of grid-cell indices, an axis-aligned
    rectangle, or a simple polygon. All forms rasterize to a cell set on the
    solver grid (a cell is marked when its node lies inside the shape).
    """

    kind: str
    cells: tuple[tuple[int, int], ...] = ()
    rect: tuple[float, float, float, float] | None = None
    polygon: tuple[tuple[float, float], ...] = ()

    @classmethod
    def from_cells(cls, cells: Iterable[tuple[int, int]]) -> "Obstacle":
        return cls(kind="cells", cells=tuple((int(a), int(b)) for a, b in cells))

    @classmethod
    def from_rect(cls, x_min, x_max, y_min, y_max) -> "Obstacle":
        if not (x_min <= x_max and y_min <= y_max):
            raise SceneValidationError("obstacle rect has inverted bounds")
        return cls(kind="rect", rect=(float(x_min), float(x_max),
                                      float(y_min), float(y_max)))

    @classmethod
    def from_polygon(cls, vertices: Iterable[tuple[float, float]]) -> "Obstacle":
        verts = tuple((float(x), float(y)) for x, y in vertices)
        if len(verts) < 3:
            raise SceneValidationError("obstacle polygon needs >= 3 vertices")
        return cls(kind="polygon", polygon=verts)


@dataclass(frozen=True)
class Camera:
    """Punctiform directional sensor.

    ``beta`` is the bearing of the first ray of the vision wedge, ``alpha``
    the angular opening (0 < alpha <= 2*pi). ``falloff_exponent`` is the p of
    the 1/dist**p recognition-pressure law fed into the wind field.
    """

    x: float
    y: float
    beta: float
    alpha: float
    falloff_exponent: float = 2.0

    def __post_init__(self):
        beta = math.fmod(self.beta, TWO_PI)
        if beta < 0.0:
            beta += TWO_PI
        object.__setattr__(self, "beta", beta)
        if not (0.0 < self.alpha <= TWO_PI + 1e-12):
            raise SceneValidationError(
                f"camera opening alpha must be in (0, 2*pi], got {self.alpha}"
            )
        object.__setattr__(self, "alpha", min(self.alpha, TWO_PI))
        if self.falloff_exponent < 0.0:
            raise SceneValidationError("camera falloff_exponent must be >= 0")

    @property
    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class Scene:
    """Immutable world description shared by solvers and the optimizer."""

    region: Region
    obstacles: tuple[Obstacle, ...] = ()
    cameras: tuple[Camera, ...] = ()
    base_speed: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "cameras", tuple(self.cameras))
        if not (self.base_speed > 0.0):
            raise SceneValidationError("base_speed must be positive")
        for cam in self.cameras:
            if not self.region.contains(cam.x, cam.y):
                raise SceneValidationError(
                    f"camera at ({cam.x}, {cam.y}) lies outside the region"
                )

    def with_cameras(self, cameras: Sequence[Camera]) -> "Scene":
        return replace(self, cameras=tuple(cameras))


# ---------------------------------------------------------------------------
# rasterization
# ---------------------------------------------------------------------------

def _point_in_polygon(x: float, y: float, verts) -> bool:
    # Even-odd ray cast; boundary handling is float-deterministic.
    inside = False
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            t = (y - y0) / (y1 - y0)
            if x < x0 + t * (x1 - x0):
                inside = not inside
    return inside


def rasterize_obstacles(obstacles: Sequence[Obstacle], grid: GridSpec) -> np.ndarray:
    """Boolean (ny, nx) mask of obstacle cells on the solver grid."""
    mask = np.zeros((grid.ny, grid.nx), dtype=bool)
    xs, ys = grid.xy_arrays()
    for obs in obstacles:
        if obs.kind == "cells":
            for ix, iy in obs.cells:
                if not (0 <= ix < grid.nx and 0 <= iy < grid.ny):
                    raise SceneValidationError(
                        f"obstacle cell ({ix}, {iy}) lies outside the "
                        f"{grid.nx}x{grid.ny} grid"
                    )
                mask[iy, ix] = True
        elif obs.kind == "rect":
            x0, x1, y0, y1 = obs.rect
            mask |= (xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)
        elif obs.kind == "polygon":
            for iy in range(grid.ny):
                for ix in range(grid.nx):
                    if not mask[iy, ix] and _point_in_polygon(
                        xs[iy, ix], ys[iy, ix], obs.polygon
                    ):
                        mask[iy, ix] = True
        else:
            raise SceneValidationError(f"unknown obstacle kind '{obs.kind}'")
    return mask


def validate_scene_on_grid(scene: Scene, grid: GridSpec) -> np.ndarray:
    """Check grid coverage and camera placement; return the obstacle mask."""
    if not grid.covers(scene.region):
        raise SceneValidationError("grid does not cover the scene region")
    mask = rasterize_obstacles(scene.obstacles, grid)
    for cam in scene.cameras:
        ix, iy = grid.nearest_node(cam.x, cam.y)
        if mask[iy, ix]:
            raise SceneValidationError(
                f"camera at ({cam.x}, {cam.y}) sits on an obstacle cell"
            )
    return mask


# ---------------------------------------------------------------------------
# visibility predicates
# ---------------------------------------------------------------------------

def bearing_from_camera(camera: Camera, point: tuple[float, float]) -> float:
    """Bearing of the ray camera -> point, clockwise from north, in [0, 2*pi)."""
    dx = point[0] - camera.x
    dy = point[1] - camera.y
    b = math.atan2(dx, dy)
    return b + TWO_PI if b < 0.0 else b


def in_scope(camera: Camera, point: tuple[float, float],
             obstacles: Sequence[Obstacle], grid: GridSpec,
             obstacle_mask: np.ndarray | None = None) -> bool:
    """True when ``point`` is inside the camera wedge and not occluded."""
    if obstacle_mask is None:
        obstacle_mask = rasterize_obstacles(obstacles, grid)
    return bool(
        _kernels.point_in_scope(
            float(point[0]), float(point[1]),
            camera.x, camera.y, camera.beta, camera.alpha,
            grid.origin[0], grid.origin[1], grid.h, obstacle_mask,
        )
    )


def scope_mask(camera: Camera, grid: GridSpec,
               obstacles: Sequence[Obstacle],
               obstacle_mask: np.ndarray | None = None) -> np.ndarray:
    """Per-node visibility mask; obstacle nodes are always False."""
    if obstacle_mask is None:
        obstacle_mask = rasterize_obstacles(obstacles, grid)
    return _kernels.scope_mask_kernel(
        grid.nx, grid.ny, grid.origin[0], grid.origin[1], grid.h,
        camera.x, camera.y, camera.beta, camera.alpha, obstacle_mask,
    )


def scope_union_mask(scene: Scene, grid: GridSpec,
                     obstacle_mask: np.ndarray | None = None) -> np.ndarray:
    """Union of all camera scope masks."""
    if obstacle_mask is None:
        obstacle_mask = rasterize_obstacles(scene.obstacles, grid)
    out = np.zeros((grid.ny, grid.nx), dtype=bool)
    for cam in scene.cameras:
        out |= scope_mask(cam, grid, scene.obstacles, obstacle_mask)
    return out


def segment_clear(p0, p1, grid: GridSpec, obstacle_mask: np.ndarray) -> bool:
    """True when the segment crosses no obstacle cell (endpoints excluded)."""
    g0 = grid.to_grid(float(p0[0]), float(p0[1]))
    g1 = grid.to_grid(float(p1[0]), float(p1[1]))
    return not _kernels.segment_blocked(g0[0], g0[1], g1[0], g1[1],
                                        obstacle_mask)


def points_in_any_scope(scene: Scene, grid: GridSpec,
                        pxs: np.ndarray, pys: np.ndarray,
                        obstacle_mask: np.ndarray | None = None) -> np.ndarray:
    """Union-of-scopes membership for arbitrary points (e.g. edge midpoints)."""
    if obstacle_mask is None:
        obstacle_mask = rasterize_obstacles(scene.obstacles, grid)
    if not scene.cameras:
        return np.zeros(len(pxs), dtype=bool)
    camx = np.array([c.x for c in scene.cameras])
    camy = np.array([c.y for c in scene.cameras])
    beta = np.array([c.beta for c in scene.cameras])
    alpha = np.array([c.alpha for c in scene.cameras])
    return _kernels.points_in_scope_any(
        np.ascontiguousarray(pxs, dtype=np.float64),
        np.ascontiguousarray(pys, dtype=np.float64),
        camx, camy, beta, alpha,
        grid.origin[0], grid.origin[1], grid.h, obstacle_mask,
    )


# ---------------------------------------------------------------------------
# scene file I/O
# ---------------------------------------------------------------------------

_REGION_KEYS = {"x_min", "x_max", "y_min", "y_max"}
_TOP_KEYS = {"region", "base_speed", "obstacles", "cameras"}
_CAMERA_KEYS = {"x", "y", "beta", "alpha", "falloff_exponent"}
_OBSTACLE_KEYS = {
    "rect": {"type", "x_min", "x_max", "y_min", "y_max"},
    "cells": {"type", "cells"},
    "polygon": {"type", "vertices"},
}


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    for key in d:
        if key not in allowed:
            raise SceneValidationError(f"unknown key '{key}' in {where}")


def scene_from_dict(data: dict) -> Scene:
    if not isinstance(data, dict):
        raise SceneValidationError("scene document must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "scene")
    if "region" not in data:
        raise SceneValidationError("scene is missing required key 'region'")
    region_d = data["region"]
    _reject_unknown(region_d, _REGION_KEYS, "region")
    missing = _REGION_KEYS - set(region_d)
    if missing:
        raise SceneValidationError(
            f"region is missing required key '{sorted(missing)[0]}'"
        )
    region = Region(**{k: float(region_d[k]) for k in _REGION_KEYS})

    obstacles = []
    for i, od in enumerate(data.get("obstacles", [])):
        where = f"obstacles[{i}]"
        if "type" not in od:
            raise SceneValidationError(f"missing key 'type' in {where}")
        kind = od["type"]
        if kind not in _OBSTACLE_KEYS:
            raise SceneValidationError(
                f"unknown obstacle type '{kind}' in {where}"
            )
        _reject_unknown(od, _OBSTACLE_KEYS[kind], where)
        if kind == "rect":
            obstacles.append(Obstacle.from_rect(
                od["x_min"], od["x_max"], od["y_min"], od["y_max"]))
        elif kind == "cells":
            obstacles.append(Obstacle.from_cells(od["cells"]))
        else:
            obstacles.append(Obstacle.from_polygon(od["vertices"]))

    cameras = []
    for i, cd in enumerate(data.get("cameras", [])):
        where = f"cameras[{i}]"
        _reject_unknown(cd, _CAMERA_KEYS, where)
        for req in ("x", "y", "beta", "alpha"):
            if req not in cd:
                raise SceneValidationError(f"missing key '{req}' in {where}")
        cameras.append(Camera(
            x=float(cd["x"]), y=float(cd["y"]),
            beta=float(cd["beta"]), alpha=float(cd["alpha"]),
            falloff_exponent=float(cd.get("falloff_exponent", 2.0)),
        ))

    return Scene(
        region=region,
        obstacles=tuple(obstacles),
        cameras=tuple(cameras),
        base_speed=float(data.get("base_speed", 1.0)),
    )


def scene_to_dict(scene: Scene) -> dict:
    obstacles = []
    for obs in scene.obstacles:
        if obs.kind == "rect":
            x0, x1, y0, y1 = obs.rect
            obstacles.append({"type": "rect", "x_min": x0, "x_max": x1,
                              "y_min": y0, "y_max": y1})
        elif obs.kind == "cells":
            obstacles.append({"type": "cells",
                              "cells": [list(c) for c in obs.cells]})
        else:
            obstacles.append({"type": "polygon",
                              "vertices": [list(v) for v in obs.polygon]})
    return {
        "region": {"x_min": scene.region.x_min, "x_max": scene.region.x_max,
                   "y_min": scene.region.y_min, "y_max": scene.region.y_max},
        "base_speed": scene.base_speed,
        "obstacles": obstacles,
        "cameras": [
            {"x": c.x, "y": c.y, "beta": c.beta, "alpha": c.alpha,
             "falloff_exponent": c.falloff_exponent}
            for c in scene.cameras
        ],
    }


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise SceneValidationError(f"scene file is not valid JSON: {exc}")
    return scene_from_dict(data)


def save_scene(scene: Scene, path) -> None:
    write_json_atomic(scene_to_dict(scene), path)


def write_json_atomic(obj, path) -> None:
    """Serialize deterministically and replace the target atomically."""
    text = json.dumps(obj, indent=2, sort_keys=True)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
