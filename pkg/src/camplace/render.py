"""Deterministic output writers: SVG overlays, PGM value images, CSV dumps.

Color code for overlays: obstacle nodes red, camera-visible nodes blue,
path points green, path points inside a camera scope purple. SVG output is
a pure function of its inputs (no timestamps or generated ids), so renders
are byte-stable and diffable.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .grid import GridSpec
from .pathing import Path
from .scene import Scene, rasterize_obstacles, scope_union_mask
from .solver import ValueField

_CELL_PX = 24
_PAD_PX = 30


def write_value_pgm(field: ValueField, path) -> None:
    """16-bit P2 image of the value field.

    Finite values map linearly to 1..65535 (v = 1 + round(u / umax * 65534));
    unreachable nodes render as 0. Rows run from the top of the region down
    (iy = ny-1 first). The comment line records the scale for inversion.
    """
    u = field.u
    finite = np.isfinite(u)
    umax = float(u[finite].max()) if finite.any() else 0.0
    with open(path, "w", encoding="utf-8") as f:
        f.write("P2\n")
        f.write(f"# umax={umax!r} encoding=u*65534/umax+1 zero=unreachable "
                "rows=top-down\n")
        f.write(f"{field.grid.nx} {field.grid.ny}\n65535\n")
        for iy in range(field.grid.ny - 1, -1, -1):
            row = []
            for ix in range(field.grid.nx):
                if not finite[iy, ix]:
                    row.append(0)
                elif umax == 0.0:
                    row.append(1)
                else:
                    row.append(1 + int(round(u[iy, ix] / umax * 65534.0)))
            f.write(" ".join(str(v) for v in row) + "\n")


def read_value_pgm(path) -> np.ndarray:
    """Invert ``write_value_pgm``: returns the (ny, nx) value array."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln for ln in f.read().splitlines() if ln.strip()]
    assert lines[0].strip() == "P2"
    umax = 0.0
    body = []
    dims = None
    for ln in lines[1:]:
        if ln.startswith("#"):
            for tok in ln.split():
                if tok.startswith("umax="):
                    umax = float(tok.split("=", 1)[1])
            continue
        body.extend(ln.split())
    nx, ny = int(body[0]), int(body[1])
    vals = np.array([int(v) for v in body[3:]], dtype=float).reshape(ny, nx)
    out = np.where(vals == 0, np.inf, (vals - 1) / 65534.0 * umax)
    return out[::-1]


def write_value_csv(field: ValueField, path) -> None:
    """Raw (ix, iy, u) rows in row-major node order."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["ix", "iy", "u"])
        for iy in range(field.grid.ny):
            for ix in range(field.grid.nx):
                writer.writerow([ix, iy, repr(float(field.u[iy, ix]))])


def read_value_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as f:
        rows = list(csv.reader(f))[1:]
    nx = max(int(r[0]) for r in rows) + 1
    ny = max(int(r[1]) for r in rows) + 1
    u = np.full((ny, nx), np.inf)
    for ix, iy, val in rows:
        u[int(iy), int(ix)] = float(val)
    return u


def _svg_xy(grid: GridSpec, x: float, y: float) -> tuple[float, float]:
    gx, gy = grid.to_grid(x, y)
    sx = _PAD_PX + gx * _CELL_PX
    sy = _PAD_PX + (grid.ny - 1 - gy) * _CELL_PX
    return sx, sy


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def scene_overlay_svg(scene: Scene, grid: GridSpec,
                      field: ValueField | None = None,
                      path: Path | None = None) -> str:
    """Compose the overlay SVG for a scene, optional field, optional path."""
    width = 2 * _PAD_PX + (grid.nx - 1) * _CELL_PX
    height = 2 * _PAD_PX + (grid.ny - 1) * _CELL_PX
    obstacle = rasterize_obstacles(scene.obstacles, grid)
    visible = scope_union_mask(scene, grid, obstacle)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]

    # Value-field shading behind the node markers, light gray ramp.
    if field is not None:
        finite = np.isfinite(field.u)
        umax = float(field.u[finite].max()) if finite.any() else 1.0
        for iy in range(grid.ny):
            for ix in range(grid.nx):
                if not finite[iy, ix] or umax == 0.0:
                    continue
                level = 235 - int(100.0 * field.u[iy, ix] / umax)
                sx, sy = _svg_xy(grid, *grid.node_xy(ix, iy))
                half = _CELL_PX / 2
                parts.append(
                    f'<rect x="{_fmt(sx - half)}" y="{_fmt(sy - half)}" '
                    f'width="{_CELL_PX}" height="{_CELL_PX}" '
                    f'fill="rgb({level},{level},{level})"/>'
                )

    marker = _CELL_PX * 0.36
    for iy in range(grid.ny):
        for ix in range(grid.nx):
            color = None
            if obstacle[iy, ix]:
                color = "red"
            elif visible[iy, ix]:
                color = "blue"
            if color is None:
                continue
            sx, sy = _svg_xy(grid, *grid.node_xy(ix, iy))
            parts.append(
                f'<rect x="{_fmt(sx - marker)}" y="{_fmt(sy - marker)}" '
                f'width="{_fmt(2 * marker)}" height="{_fmt(2 * marker)}" '
                f'fill="{color}"/>'
            )

    for cam in scene.cameras:
        sx, sy = _svg_xy(grid, cam.x, cam.y)
        reach = 3.0 * _CELL_PX
        # Wedge boundary rays; bearing is clockwise from north, SVG y is down.
        for ang in (cam.beta, cam.beta + cam.alpha):
            ex = sx + reach * math.sin(ang)
            ey = sy - reach * math.cos(ang)
            parts.append(
                f'<line x1="{_fmt(sx)}" y1="{_fmt(sy)}" x2="{_fmt(ex)}" '
                f'y2="{_fmt(ey)}" stroke="darkorange" stroke-width="2"/>'
            )
        parts.append(
            f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" r="{_fmt(_CELL_PX * 0.3)}" '
            'fill="darkorange"/>'
        )

    if path is not None and len(path.points) > 0:
        flags = path.seg_in_scope
        pts = path.points
        for i in range(len(pts) - 1):
            x0, y0 = _svg_xy(grid, pts[i][0], pts[i][1])
            x1, y1 = _svg_xy(grid, pts[i + 1][0], pts[i + 1][1])
            seen = bool(flags[i]) if flags is not None else False
            color = "purple" if seen else "green"
            parts.append(
                f'<line x1="{_fmt(x0)}" y1="{_fmt(y0)}" x2="{_fmt(x1)}" '
                f'y2="{_fmt(y1)}" stroke="{color}" stroke-width="3"/>'
            )
        for i, (x, y) in enumerate(pts):
            seen = False
            if flags is not None and len(flags):
                before = flags[i - 1] if i > 0 else False
                after = flags[i] if i < len(flags) else False
                seen = bool(before or after)
            color = "purple" if seen else "green"
            sx, sy = _svg_xy(grid, x, y)
            parts.append(
                f'<circle cx="{_fmt(sx)}" cy="{_fmt(sy)}" '
                f'r="{_fmt(_CELL_PX * 0.18)}" fill="{color}"/>'
            )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_overlay_svg(path, scene: Scene, grid: GridSpec,
                      field: ValueField | None = None,
                      track: Path | None = None) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(scene_overlay_svg(scene, grid, field, track))
