"""Minimum-cost-to-destination solvers.

Two modes share the ValueField result type:

* ``grid_dijkstra``: exact shortest paths on the 4-connected node graph with
  edge weight h * (1 + eta * [edge midpoint visible to some camera]);
  obstacle nodes are deleted from the graph.
* ``ordered_upwind``: front expansion for the continuous anisotropic
  minimum-time equation, accepting nodes in non-decreasing value order and
  solving a quadratic on simplices of the accepted front within the
  anisotropy-bounded stencil radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigurationError, SceneValidationError
from .grid import GridSpec
from .scene import Scene, points_in_any_scope, validate_scene_on_grid
from .windfield import WindField

# Node state codes (mirrors the kernel constants).
FAR, CONSIDERED, ACCEPTED = _kernels.FAR, _kernels.CONSIDERED, _kernels.ACCEPTED


@dataclass
class ValueField:
    """Per-node minimum cost to the destination plus solver bookkeeping.

    ``u`` is +inf on obstacle and unreachable nodes. ``pred``/``pred2`` hold
    the flat indices of the nodes that produced each final value (pred2 is -1
    for one-sided or graph updates). ``accept_log`` lists values in
    acceptance order, for monotonicity audits.
    """

    grid: GridSpec
    u: np.ndarray          # (ny, nx) float64
    state: np.ndarray      # (ny, nx) uint8
    pred: np.ndarray       # (ny, nx) int64, flat index or -1
    pred2: np.ndarray      # (ny, nx) int64, flat index or -1
    accept_log: np.ndarray
    destination: tuple[float, float]
    mode: str
    base_speed: float
    eta: float | None = None
    gamma: float | None = None
    obstacle_mask: np.ndarray | None = None

    def node_value(self, ix: int, iy: int) -> float:
        return float(self.u[iy, ix])

    def value_at(self, point) -> float:
        """Value at the node nearest to ``point``."""
        ix, iy = self.grid.nearest_node(point[0], point[1])
        return float(self.u[iy, ix])

    def is_reachable(self, point) -> bool:
        return math.isfinite(self.value_at(point))


@dataclass(frozen=True)
class SimplexUpdate:
    """Result of one simplex solve: quadratic coefficients and the candidate."""

    a: float
    b: float
    c: float
    value: float
    characteristic_inside: bool
    has_real_root: bool

    @property
    def valid(self) -> bool:
        return self.has_real_root and self.characteristic_inside


def front_speed(n, w, base_speed: float) -> float:
    """Front speed in unit direction ``n``: base_speed - <n, w>.

    Positive by construction because the wind magnitude is capped strictly
    below the base speed.
    """
    return float(base_speed - (n[0] * w[0] + n[1] * w[1]))


def simplex_update(x, xj, xk, uj: float, uk: float, w, base_speed: float
                   ) -> SimplexUpdate:
    """Solve the local quadratic on the simplex (x, xj, xk).

    ``uj``/``uk`` are the known values at xj/xk, ``w`` the wind at x. Returns
    the larger quadratic root and whether the implied characteristic lies in
    the cone spanned by the simplex edges; callers fall back to one-sided
    edge updates when the update is invalid.
    """
    value, inside, a, b, c, has_root = _kernels.simplex_candidate(
        float(xj[0] - x[0]), float(xj[1] - x[1]),
        float(xk[0] - x[0]), float(xk[1] - x[1]),
        float(uj), float(uk), float(w[0]), float(w[1]), float(base_speed),
    )
    return SimplexUpdate(a=a, b=b, c=c, value=float(value),
                         characteristic_inside=bool(inside),
                         has_real_root=bool(has_root))


def one_sided_value(x, xj, uj: float, w, base_speed: float) -> float:
    """Arrival time at x along the straight edge from xj (fallback update)."""
    return float(_kernels._edge_candidate(
        float(x[0]), float(x[1]), float(xj[0]), float(xj[1]),
        float(uj), float(w[0]), float(w[1]), float(base_speed),
    ))


def obstacle_speed_scaling(speed: float, xi: float) -> float:
    """Soft-obstacle slowdown (1 - xi) * speed; requires 0 <= xi < 1."""
    if not (0.0 <= xi < 1.0):
        raise ConfigurationError(f"speed scaling xi must be in [0, 1), got {xi}")
    return (1.0 - xi) * speed


def build_xi_map(scene: Scene, grid: GridSpec, xi_max: float = 0.99) -> np.ndarray:
    """Per-node slowdown map: xi_max on obstacle cells, zero elsewhere."""
    if not (0.0 <= xi_max < 1.0):
        raise ConfigurationError(f"xi_max must be in [0, 1), got {xi_max}")
    mask = validate_scene_on_grid(scene, grid)
    xi = np.zeros((grid.ny, grid.nx))
    xi[mask] = xi_max
    return xi


def _resolve_destination(scene: Scene, grid: GridSpec, destination,
                         obstacle_mask: np.ndarray) -> tuple[int, int]:
    dx, dy = float(destination[0]), float(destination[1])
    if not scene.region.contains(dx, dy):
        raise SceneValidationError("destination lies outside the region")
    dix, diy = grid.nearest_node(dx, dy)
    if obstacle_mask[diy, dix]:
        raise SceneValidationError("destination lies inside an obstacle")
    return dix, diy


def grid_dijkstra(scene: Scene, destination, eta: float, grid: GridSpec
                  ) -> ValueField:
    """Exact 4-connected shortest-path tree rooted at the destination."""
    if eta < 0.0:
        raise ConfigurationError(f"eta must be non-negative, got {eta}")
    obstacle_mask = validate_scene_on_grid(scene, grid)
    dix, diy = _resolve_destination(scene, grid, destination, obstacle_mask)

    xs, ys = grid.xy_arrays()
    h = grid.h
    # Horizontal edge midpoints: ((ix + 0.5) * h, iy * h) for ix < nx - 1.
    mx_e = (xs[:, :-1] + xs[:, 1:]) * 0.5
    my_e = ys[:, :-1]
    mx_v = xs[:-1, :]
    my_v = (ys[:-1, :] + ys[1:, :]) * 0.5
    vis_e = points_in_any_scope(
        scene, grid, mx_e.ravel(), my_e.ravel(), obstacle_mask
    ).reshape(mx_e.shape)
    vis_v = points_in_any_scope(
        scene, grid, mx_v.ravel(), my_v.ravel(), obstacle_mask
    ).reshape(mx_v.shape)
    we = np.where(vis_e, h * (1.0 + eta), h)
    wv = np.where(vis_v, h * (1.0 + eta), h)

    ok = np.ascontiguousarray(~obstacle_mask.ravel())
    u_flat, pred_flat, accepted = _kernels.dijkstra_kernel(
        grid.nx, grid.ny, np.ascontiguousarray(we), np.ascontiguousarray(wv),
        ok, grid.flat(dix, diy),
    )
    state = np.where(np.isfinite(u_flat), ACCEPTED, FAR).astype(np.uint8)
    return ValueField(
        grid=grid,
        u=u_flat.reshape(grid.ny, grid.nx),
        state=state.reshape(grid.ny, grid.nx),
        pred=pred_flat.reshape(grid.ny, grid.nx),
        pred2=np.full((grid.ny, grid.nx), -1, np.int64),
        accept_log=accepted,
        destination=(float(destination[0]), float(destination[1])),
        mode="dijkstra",
        base_speed=scene.base_speed,
        eta=float(eta),
        obstacle_mask=obstacle_mask,
    )


def anisotropy_ratio(wind: WindField, base_speed: float,
                     node_ok: np.ndarray | None = None) -> float:
    """Max over nodes of (V + ||w||) / (V - ||w||); 1 for a calm field."""
    mags = wind.magnitudes()
    if node_ok is not None:
        mags = np.where(node_ok, mags, 0.0)
    m = float(mags.max(initial=0.0))
    if m >= base_speed:
        raise ConfigurationError("wind magnitude reaches the base speed")
    return (base_speed + m) / (base_speed - m)


def ordered_upwind(scene: Scene, wind: WindField, destination, *,
                   obstacle_mode: str = "delete", xi_max: float = 0.99
                   ) -> ValueField:
    """Front-expansion solve of the anisotropic minimum-time equation.

    ``obstacle_mode='delete'`` removes obstacle nodes from the mesh (the
    default); ``'soft'`` keeps them and scales the front speed by
    (1 - xi_max) there instead.
    """
    grid = wind.grid
    if obstacle_mode not in ("delete", "soft"):
        raise ConfigurationError(f"unknown obstacle_mode '{obstacle_mode}'")
    obstacle_mask = validate_scene_on_grid(scene, grid)
    dix, diy = _resolve_destination(scene, grid, destination, obstacle_mask)
    dxy = (float(destination[0]), float(destination[1]))
    wd = wind.destination
    if math.hypot(wd[0] - dxy[0], wd[1] - dxy[1]) > 1e-9 * max(grid.h, 1.0):
        raise ConfigurationError(
            "wind field was built for a different destination"
        )

    if obstacle_mode == "delete":
        ok = ~obstacle_mask
        xi = np.zeros((grid.ny, grid.nx))
        gate_los = bool(obstacle_mask.any())
    else:
        if not (0.0 <= xi_max < 1.0):
            raise ConfigurationError(f"xi_max must be in [0, 1), got {xi_max}")
        ok = np.ones((grid.ny, grid.nx), dtype=bool)
        xi = np.where(obstacle_mask, xi_max, 0.0)
        gate_los = False

    gamma = anisotropy_ratio(wind, scene.base_speed, ok)
    wx = np.ascontiguousarray(wind.vectors[..., 0].ravel())
    wy = np.ascontiguousarray(wind.vectors[..., 1].ravel())

    u_flat, state_flat, pred1, pred2, accepted = _kernels.oum_kernel(
        grid.nx, grid.ny, grid.h, grid.origin[0], grid.origin[1],
        wx, wy, scene.base_speed,
        np.ascontiguousarray(ok.ravel()),
        np.ascontiguousarray(xi.ravel()),
        dix, diy, gamma, gate_los, obstacle_mask,
    )
    return ValueField(
        grid=grid,
        u=u_flat.reshape(grid.ny, grid.nx),
        state=state_flat.reshape(grid.ny, grid.nx),
        pred=pred1.reshape(grid.ny, grid.nx),
        pred2=pred2.reshape(grid.ny, grid.nx),
        accept_log=accepted,
        destination=dxy,
        mode="upwind",
        base_speed=scene.base_speed,
        gamma=gamma,
        obstacle_mask=obstacle_mask,
    )
