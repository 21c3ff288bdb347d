"""Shared test utilities: random scene generation and independent oracles.

The oracles here deliberately avoid the library's solver code paths:
shortest paths come from a vectorized relaxation fixpoint, supercover
membership from closed segment/rectangle intersection, and small-grid
optima from exhaustive path enumeration.
"""

import math

import numpy as np

import camplace as cp
from camplace.scene import points_in_any_scope, rasterize_obstacles


def random_scene(rng, max_n=12, n_cameras=None, with_obstacles=True):
    """Random scene + aligned grid; h = 1, region [0, n-1]^2."""
    n = int(rng.integers(4, max_n + 1))
    region = cp.Region(0.0, float(n - 1), 0.0, float(n - 1))
    grid = cp.GridSpec.from_region(region, n, n)

    obstacles = ()
    if with_obstacles:
        n_cells = int(rng.integers(0, max(2, n * n // 8)))
        cells = set()
        for _ in range(n_cells):
            cells.add((int(rng.integers(n)), int(rng.integers(n))))
        # Keep the corners free so corner OD pairs stay usable.
        cells -= {(0, 0), (n - 1, n - 1), (n - 1, 0), (0, n - 1)}
        if cells:
            obstacles = (cp.Obstacle.from_cells(sorted(cells)),)

    mask = rasterize_obstacles(obstacles, grid)
    if n_cameras is None:
        n_cameras = int(rng.integers(0, 4))
    cameras = []
    tries = 0
    while len(cameras) < n_cameras and tries < 200:
        tries += 1
        ix, iy = int(rng.integers(n)), int(rng.integers(n))
        if mask[iy, ix]:
            continue
        cameras.append(cp.Camera(
            x=float(ix), y=float(iy),
            beta=float(rng.uniform(0, 2 * math.pi)),
            alpha=float(rng.uniform(0.3, 2 * math.pi)),
        ))
    scene = cp.Scene(region=region, obstacles=obstacles,
                     cameras=tuple(cameras))
    return scene, grid


def edge_weights(scene, grid, eta):
    """Midpoint-visibility edge weights, same definition as the solver."""
    mask = rasterize_obstacles(scene.obstacles, grid)
    xs, ys = grid.xy_arrays()
    mx_e = (xs[:, :-1] + xs[:, 1:]) * 0.5
    my_e = ys[:, :-1]
    mx_v = xs[:-1, :]
    my_v = (ys[:-1, :] + ys[1:, :]) * 0.5
    vis_e = points_in_any_scope(scene, grid, mx_e.ravel(), my_e.ravel(),
                                mask).reshape(mx_e.shape)
    vis_v = points_in_any_scope(scene, grid, mx_v.ravel(), my_v.ravel(),
                                mask).reshape(mx_v.shape)
    we = np.where(vis_e, grid.h * (1.0 + eta), grid.h)
    wv = np.where(vis_v, grid.h * (1.0 + eta), grid.h)
    return we, wv, mask


def bellman_ford_values(scene, grid, dest, eta):
    """Relaxation-to-fixpoint shortest paths on the 4-connected grid."""
    we, wv, mask = edge_weights(scene, grid, eta)
    ny, nx = grid.ny, grid.nx
    u = np.full((ny, nx), np.inf)
    dix, diy = grid.nearest_node(*dest)
    if mask[diy, dix]:
        return u
    u[diy, dix] = 0.0
    for _ in range(nx * ny + 1):
        nu = u.copy()
        nu[:, :-1] = np.minimum(nu[:, :-1], u[:, 1:] + we)
        nu[:, 1:] = np.minimum(nu[:, 1:], u[:, :-1] + we)
        nu[:-1, :] = np.minimum(nu[:-1, :], u[1:, :] + wv)
        nu[1:, :] = np.minimum(nu[1:, :], u[:-1, :] + wv)
        nu[mask] = np.inf
        if np.array_equal(nu, u, equal_nan=True):
            break
        u = nu
    return u


def path_edge_cost(path_points, we, wv, grid):
    """Re-sum edge weights along a node path, destination end first."""
    pts = list(path_points)[::-1]
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        aix, aiy = grid.nearest_node(*a)
        bix, biy = grid.nearest_node(*b)
        if aiy == biy and abs(aix - bix) == 1:
            total = total + we[aiy, min(aix, bix)]
        elif aix == bix and abs(aiy - biy) == 1:
            total = total + wv[min(aiy, biy), aix]
        else:
            raise AssertionError(f"non-adjacent path step {a} -> {b}")
    return total


def enumerate_min_cost(grid, we, wv, mask, start_node, dest_node):
    """Exhaustive minimum over all simple 4-connected paths (tiny grids)."""
    nx, ny = grid.nx, grid.ny
    best = [math.inf]

    def neighbors(ix, iy):
        if ix + 1 < nx:
            yield ix + 1, iy, we[iy, ix]
        if ix - 1 >= 0:
            yield ix - 1, iy, we[iy, ix - 1]
        if iy + 1 < ny:
            yield ix, iy + 1, wv[iy, ix]
        if iy - 1 >= 0:
            yield ix, iy - 1, wv[iy - 1, ix]

    visited = np.zeros((ny, nx), dtype=bool)

    def dfs(ix, iy, cost):
        if cost >= best[0]:
            return
        if (ix, iy) == dest_node:
            best[0] = cost
            return
        visited[iy, ix] = True
        for jx, jy, w in neighbors(ix, iy):
            if visited[jy, jx] or mask[jy, jx]:
                continue
            dfs(jx, jy, cost + w)
        visited[iy, ix] = False

    dfs(start_node[0], start_node[1], 0.0)
    return best[0]


def segment_intersects_cell(p0, p1, cx, cy, tol=1e-12):
    """Closed segment vs closed unit cell centred on (cx, cy), grid coords."""
    t0, t1 = 0.0, 1.0
    dx = p1[0] - p0[0]
    dy = p1[1] - p0[1]
    for p, q in (
        (-dx, p0[0] - (cx - 0.5)),
        (dx, (cx + 0.5) - p0[0]),
        (-dy, p0[1] - (cy - 0.5)),
        (dy, (cy + 0.5) - p0[1]),
    ):
        if p == 0.0:
            if q < -tol:
                return False
            continue
        t = q / p
        if p < 0.0:
            if t > t1 + tol:
                return False
            t0 = max(t0, t)
        else:
            if t < t0 - tol:
                return False
            t1 = min(t1, t)
    return t0 <= t1 + tol


def supercover_blocked_oracle(g0, g1, obstacle_mask):
    """Exhaustive supercover blocking test (endpoint cells excluded)."""
    ny, nx = obstacle_mask.shape
    c0 = (int(math.floor(g0[0] + 0.5)), int(math.floor(g0[1] + 0.5)))
    c1 = (int(math.floor(g1[0] + 0.5)), int(math.floor(g1[1] + 0.5)))
    lox = max(0, int(math.floor(min(g0[0], g1[0]) - 0.5)) - 1)
    hix = min(nx - 1, int(math.ceil(max(g0[0], g1[0]) + 0.5)) + 1)
    loy = max(0, int(math.floor(min(g0[1], g1[1]) - 0.5)) - 1)
    hiy = min(ny - 1, int(math.ceil(max(g0[1], g1[1]) + 0.5)) + 1)
    for cy in range(loy, hiy + 1):
        for cx in range(lox, hix + 1):
            if not obstacle_mask[cy, cx]:
                continue
            if (cx, cy) == c0 or (cx, cy) == c1:
                continue
            if segment_intersects_cell(g0, g1, cx, cy):
                return True
    return False


def isotropic_two_point(uj, uk, h=1.0):
    """Classical right-simplex arrival-time formula for unit speed."""
    if abs(uj - uk) >= h:
        return min(uj, uk) + h
    return (uj + uk + math.sqrt(2 * h * h - (uj - uk) ** 2)) / 2.0


def figure_scene():
    """20x20 scene: bottom-rooted wall, camera watching the low gap crossing."""
    region = cp.Region(0.0, 19.0, 0.0, 19.0)
    wall = cp.Obstacle.from_rect(8, 11, 0, 13)
    cam = cp.Camera(x=9.0, y=19.0, beta=math.pi - math.pi / 8,
                    alpha=math.pi / 4)
    scene = cp.Scene(region=region, obstacles=(wall,), cameras=(cam,))
    grid = cp.GridSpec.from_region(region, 20, 20)
    return scene, grid, (0.0, 0.0), (19.0, 0.0)


def placement_scene():
    """10x10 empty-camera scene with one central block and a corner OD pair."""
    region = cp.Region(0.0, 9.0, 0.0, 9.0)
    block = cp.Obstacle.from_rect(4, 5, 3, 6)
    scene = cp.Scene(region=region, obstacles=(block,))
    grid = cp.GridSpec.from_region(region, 10, 10)
    return scene, grid, (0.0, 0.0), (9.0, 9.0)
