"""Path extraction from a value field, plus visibility annotation.

Continuous mode integrates the characteristic flow
dX/dt = -V * grad(u)/|grad(u)| + w(X) downhill from the start (u was
expanded from the destination, so descending u moves toward it). Discrete
mode follows the shortest-path-tree predecessors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (ConfigurationError, PathExtractionError,
                     UnreachableError)
from .grid import GridSpec
from .scene import Scene, points_in_any_scope, rasterize_obstacles, segment_clear
from .solver import ValueField
from .windfield import WindField


@dataclass
class Path:
    """Polyline from start to destination with per-segment visibility flags."""

    points: np.ndarray               # (m, 2)
    total_time: float
    seg_in_scope: np.ndarray | None = None   # (m-1,) bool, set by annotation
    visible_fraction: float | None = None

    @property
    def start(self) -> tuple[float, float]:
        return tuple(self.points[0])

    @property
    def end(self) -> tuple[float, float]:
        return tuple(self.points[-1])

    @property
    def length(self) -> float:
        if len(self.points) < 2:
            return 0.0
        deltas = np.diff(self.points, axis=0)
        return float(np.hypot(deltas[:, 0], deltas[:, 1]).sum())

    def segment_lengths(self) -> np.ndarray:
        if len(self.points) < 2:
            return np.zeros(0)
        deltas = np.diff(self.points, axis=0)
        return np.hypot(deltas[:, 0], deltas[:, 1])

    def to_json_list(self) -> list:
        """Point dump; ``in_scope`` flags the segment starting at each point."""
        flags = self.seg_in_scope
        out = []
        for i, (x, y) in enumerate(self.points):
            in_scope = bool(flags[i]) if flags is not None and i < len(flags) else False
            out.append({"x": float(x), "y": float(y), "in_scope": in_scope})
        return out


def _node_gradients(u: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-node gradient: central differences, one-sided next to inf nodes."""
    ny, nx = u.shape
    gx = np.zeros_like(u)
    gy = np.zeros_like(u)
    finite = np.isfinite(u)
    for iy in range(ny):
        for ix in range(nx):
            if not finite[iy, ix]:
                continue
            left = finite[iy, ix - 1] if ix > 0 else False
            right = finite[iy, ix + 1] if ix + 1 < nx else False
            if left and right:
                gx[iy, ix] = (u[iy, ix + 1] - u[iy, ix - 1]) / (2 * h)
            elif right:
                gx[iy, ix] = (u[iy, ix + 1] - u[iy, ix]) / h
            elif left:
                gx[iy, ix] = (u[iy, ix] - u[iy, ix - 1]) / h
            down = finite[iy - 1, ix] if iy > 0 else False
            up = finite[iy + 1, ix] if iy + 1 < ny else False
            if down and up:
                gy[iy, ix] = (u[iy + 1, ix] - u[iy - 1, ix]) / (2 * h)
            elif up:
                gy[iy, ix] = (u[iy + 1, ix] - u[iy, ix]) / h
            elif down:
                gy[iy, ix] = (u[iy, ix] - u[iy - 1, ix]) / h
    return gx, gy


def _bilinear_masked(arr: np.ndarray, finite: np.ndarray, grid: GridSpec,
                     x: float, y: float) -> float:
    """Bilinear sample ignoring non-finite corners (weights renormalized)."""
    gx, gy = grid.to_grid(x, y)
    gx = min(max(gx, 0.0), grid.nx - 1.0)
    gy = min(max(gy, 0.0), grid.ny - 1.0)
    ix0 = min(int(gx), grid.nx - 2)
    iy0 = min(int(gy), grid.ny - 2)
    fx = gx - ix0
    fy = gy - iy0
    total = 0.0
    wsum = 0.0
    for dy, wy in ((0, 1 - fy), (1, fy)):
        for dx, wx in ((0, 1 - fx), (1, fx)):
            if wx * wy == 0.0:
                continue
            if finite[iy0 + dy, ix0 + dx]:
                total += wx * wy * arr[iy0 + dy, ix0 + dx]
                wsum += wx * wy
    if wsum == 0.0:
        return math.inf
    return total / wsum


def interpolate_value(field: ValueField, x: float, y: float) -> float:
    """Bilinear u at an arbitrary point, skipping unreachable corners."""
    finite = np.isfinite(field.u)
    return _bilinear_masked(field.u, finite, field.grid, x, y)


class _Interp:
    def __init__(self, field: ValueField):
        self.grid = field.grid
        self.u = field.u
        self.finite = np.isfinite(field.u)
        self.gx, self.gy = _node_gradients(field.u, field.grid.h)

    def value(self, x, y):
        return _bilinear_masked(self.u, self.finite, self.grid, x, y)

    def gradient(self, x, y):
        return (
            _bilinear_masked(self.gx, self.finite, self.grid, x, y),
            _bilinear_masked(self.gy, self.finite, self.grid, x, y),
        )


def _in_obstacle(grid: GridSpec, obstacle_mask: np.ndarray,
                 x: float, y: float) -> bool:
    ix, iy = grid.nearest_node(x, y)
    return bool(obstacle_mask[iy, ix])


def _discrete_step(interp: _Interp, grid: GridSpec, obstacle_mask, pos, va, wind):
    """Fallback move to the neighbouring node with the smallest value."""
    ix, iy = grid.nearest_node(pos[0], pos[1])
    here = interp.value(pos[0], pos[1])
    best = here
    best_node = None
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            jx, jy = ix + dx, iy + dy
            if not (0 <= jx < grid.nx and 0 <= jy < grid.ny):
                continue
            if obstacle_mask[jy, jx] or not interp.finite[jy, jx]:
                continue
            val = interp.u[jy, jx]
            if val < best:
                best = val
                best_node = (jx, jy)
    if best_node is None:
        return None
    nx_, ny_ = grid.node_xy(*best_node)
    d = math.hypot(nx_ - pos[0], ny_ - pos[1])
    if d == 0.0:
        return None
    ax = (nx_ - pos[0]) / d
    ay = (ny_ - pos[1]) / d
    wx, wy = wind.at(pos[0], pos[1])
    speed = max(va + ax * wx + ay * wy, 1e-12)
    return (nx_, ny_), d / speed


def extract_path_characteristic(field: ValueField, wind: WindField,
                                start, step: float) -> Path:
    """Forward-Euler descent along the characteristic flow.

    ``step`` is the spatial step length (at most one grid spacing); the
    walk terminates once within one grid spacing of the destination and
    appends the destination itself with a straight final leg.
    """
    grid = field.grid
    h = grid.h
    if not (0.0 < step <= h):
        raise ConfigurationError(f"step must lie in (0, h={h:.6g}], got {step}")
    obstacle_mask = field.obstacle_mask
    if obstacle_mask is None:
        obstacle_mask = np.zeros((grid.ny, grid.nx), dtype=bool)
    va = field.base_speed
    dest = field.destination
    sx, sy = float(start[0]), float(start[1])

    if _in_obstacle(grid, obstacle_mask, sx, sy):
        raise UnreachableError("start lies inside an obstacle")
    interp = _Interp(field)
    u0 = interp.value(sx, sy)
    if not math.isfinite(u0):
        raise UnreachableError("start cannot reach the destination")

    if sx == dest[0] and sy == dest[1]:
        return Path(points=np.array([[sx, sy]]), total_time=0.0)

    def _append_leg(pts, pos, target, step):
        """Straight sub-stepped leg so point spacing never exceeds step.

        Falls back to a single jump if any intermediate sample would round
        into an obstacle cell (corner-grazing diagonals).
        """
        d = math.hypot(target[0] - pos[0], target[1] - pos[1])
        if d < 1e-15:
            return
        pieces = max(int(math.ceil(d / step)), 1)
        samples = [(pos[0] + (i / pieces) * (target[0] - pos[0]),
                    pos[1] + (i / pieces) * (target[1] - pos[1]))
                   for i in range(1, pieces + 1)]
        if any(_in_obstacle(grid, obstacle_mask, x, y) for x, y in samples[:-1]):
            pts.append(target)
        else:
            pts.extend(samples)

    max_steps = int(20.0 * (u0 / step) * va) + 8
    pts = [(sx, sy)]
    pos = (sx, sy)
    total = 0.0
    for _ in range(max_steps):
        ddest = math.hypot(pos[0] - dest[0], pos[1] - dest[1])
        if ddest <= h:
            if ddest > 0.0:
                ax = (dest[0] - pos[0]) / ddest
                ay = (dest[1] - pos[1]) / ddest
                wx, wy = wind.at(pos[0], pos[1])
                speed = max(va + ax * wx + ay * wy, 1e-12)
                total += ddest / speed
                _append_leg(pts, pos, dest, step)
            return Path(points=np.asarray(pts), total_time=total)

        gx, gy = interp.gradient(pos[0], pos[1])
        gn = math.hypot(gx, gy)
        moved = False
        if math.isfinite(gn) and gn > 1e-12:
            wx, wy = wind.at(pos[0], pos[1])
            dirx = -va * gx / gn + wx
            diry = -va * gy / gn + wy
            speed = math.hypot(dirx, diry)
            if speed > 1e-12:
                dt = step / speed
                for _ in range(6):
                    cand = (pos[0] + dirx * dt, pos[1] + diry * dt)
                    if (grid.covers_point(cand[0], cand[1])
                            and not _in_obstacle(grid, obstacle_mask,
                                                 cand[0], cand[1])):
                        pos = cand
                        pts.append(pos)
                        total += dt
                        moved = True
                        break
                    dt *= 0.5
        if not moved:
            fallback = _discrete_step(interp, grid, obstacle_mask, pos, va, wind)
            if fallback is None:
                raise PathExtractionError(
                    "characteristic descent stalled before the destination",
                    partial_path=Path(points=np.asarray(pts), total_time=total),
                )
            target, dt = fallback
            # Route through the current cell centre: every sub-sample then
            # stays inside free cells even on corner-grazing diagonal moves.
            own = grid.node_xy(*grid.nearest_node(pos[0], pos[1]))
            _append_leg(pts, pos, own, step)
            _append_leg(pts, own, target, step)
            pos = target
            total += dt

    raise PathExtractionError(
        "characteristic descent exceeded the step budget",
        partial_path=Path(points=np.asarray(pts), total_time=total),
    )


def extract_path_discrete(field: ValueField, start) -> Path:
    """Backtrack the shortest-path-tree predecessors from ``start``."""
    if field.mode != "dijkstra":
        raise ConfigurationError("discrete extraction needs a dijkstra field")
    grid = field.grid
    six, siy = grid.nearest_node(float(start[0]), float(start[1]))
    cost = field.u[siy, six]
    if not math.isfinite(cost):
        raise UnreachableError("start cannot reach the destination")
    pts = []
    idx = grid.flat(six, siy)
    pred = field.pred.ravel()
    guard = grid.n_nodes + 1
    for _ in range(guard):
        ix, iy = grid.unflat(idx)
        pts.append(grid.node_xy(ix, iy))
        nxt = pred[idx]
        if nxt < 0:
            break
        idx = int(nxt)
    return Path(points=np.asarray(pts), total_time=float(cost))


def annotate_visibility(path: Path, scene: Scene, grid: GridSpec) -> Path:
    """Set per-segment scope flags (by midpoint) and the visible fraction."""
    if len(path.points) < 2:
        path.seg_in_scope = np.zeros(0, dtype=bool)
        path.visible_fraction = 0.0
        return path
    mids = (path.points[:-1] + path.points[1:]) * 0.5
    flags = points_in_any_scope(scene, grid, mids[:, 0], mids[:, 1])
    lengths = path.segment_lengths()
    total = lengths.sum()
    path.seg_in_scope = flags
    path.visible_fraction = float(lengths[flags].sum() / total) if total > 0 else 0.0
    return path


def smooth_path(path: Path, scene: Scene, grid: GridSpec) -> Path:
    """Optional post-pass: replace sub-chains by straight segments.

    A shortcut is taken only when the straight segment crosses no obstacle
    cell and stays outside every camera scope, so it never increases cost.
    """
    pts = path.points
    if len(pts) < 3:
        return path
    obstacle_mask = rasterize_obstacles(scene.obstacles, grid)
    kept = [0]
    i = 0
    n = len(pts)
    while i < n - 1:
        j = n - 1
        found = i + 1
        while j > i + 1:
            if _shortcut_ok(pts[i], pts[j], scene, grid, obstacle_mask):
                found = j
                break
            j -= 1
        kept.append(found)
        i = found
    new_pts = pts[kept]
    return Path(points=new_pts, total_time=path.total_time)


def _shortcut_ok(p0, p1, scene, grid, obstacle_mask) -> bool:
    if not segment_clear(p0, p1, grid, obstacle_mask):
        return False
    d = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
    nsamp = max(int(math.ceil(d / (grid.h * 0.25))) + 1, 2)
    ts = np.linspace(0.0, 1.0, nsamp)
    xs = p0[0] + ts * (p1[0] - p0[0])
    ys = p0[1] + ts * (p1[1] - p0[1])
    return not points_in_any_scope(scene, grid, xs, ys, obstacle_mask).any()


def write_path_json(path: Path, file_path) -> None:
    with open(file_path, "w", encoding="utf-8") as f:
        json.dump(path.to_json_list(), f, indent=2, sort_keys=True)
        f.write("\n")
