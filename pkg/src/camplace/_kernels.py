"""Numeric kernels: visibility rasterization, Dijkstra and ordered-upwind solves.

Everything here is written in nopython style (scalar loops over flat numpy
arrays) so the same source runs jitted or as plain Python, selected by
``camplace._backend``. Node (ix, iy) maps to flat index ``iy * nx + ix``;
grid cells are unit squares centred on nodes in grid coordinates
(``g = (coord - origin) / h``).
"""

import math

import numpy as np

from ._backend import kernel

# Node states used by the front-expansion solvers.
FAR = 0
CONSIDERED = 1
ACCEPTED = 2

# Closed angular comparison slack: keeps boundary bearings (which accumulate
# one ulp in the modular arithmetic) inside the wedge.
_ANG_EPS = 1e-12
# Barycentric tolerance for the characteristic-containment test.
_CONE_EPS = 1e-9


# ---------------------------------------------------------------------------
# binary heap with lazy deletion (arrays + explicit size)
# ---------------------------------------------------------------------------

@kernel
def _heap_push(keys, vals, size, key, val):
    i = size
    keys[i] = key
    vals[i] = val
    while i > 0:
        p = (i - 1) // 2
        if keys[p] <= keys[i]:
            break
        keys[p], keys[i] = keys[i], keys[p]
        vals[p], vals[i] = vals[i], vals[p]
        i = p
    return size + 1


@kernel
def _heap_pop(keys, vals, size):
    key = keys[0]
    val = vals[0]
    size -= 1
    keys[0] = keys[size]
    vals[0] = vals[size]
    i = 0
    while True:
        left = 2 * i + 1
        right = left + 1
        smallest = i
        if left < size and keys[left] < keys[smallest]:
            smallest = left
        if right < size and keys[right] < keys[smallest]:
            smallest = right
        if smallest == i:
            break
        keys[smallest], keys[i] = keys[i], keys[smallest]
        vals[smallest], vals[i] = vals[i], vals[smallest]
        i = smallest
    return key, val, size


# ---------------------------------------------------------------------------
# supercover line-of-sight
# ---------------------------------------------------------------------------

@kernel
def _cell(g):
    # Cell of a grid coordinate; points exactly on a boundary (g = k + 0.5)
    # belong to the upper cell.
    return int(math.floor(g + 0.5))


@kernel
def segment_blocked(gx0, gy0, gx1, gy1, obst):
    """Supercover walk from (gx0, gy0) to (gx1, gy1) in grid coordinates.

    Returns True when any traversed cell, excluding the two endpoint cells,
    is an obstacle cell. Cells touched only at a corner count as traversed;
    segments lying exactly on a cell boundary count both adjacent cells.
    """
    ny, nx = obst.shape
    cx0 = _cell(gx0)
    cy0 = _cell(gy0)
    cx1 = _cell(gx1)
    cy1 = _cell(gy1)

    dx = gx1 - gx0
    dy = gy1 - gy0

    # Degenerate axis-aligned segments lying exactly on a cell boundary.
    if dx == 0.0 and abs((gx0 + 0.5) - math.floor(gx0 + 0.5)) < 1e-12:
        lo = min(cy0, cy1)
        hi = max(cy0, cy1)
        for cy in range(lo, hi + 1):
            if cy == cy0 or cy == cy1:
                continue
            for cx in (cx0, cx0 - 1):
                if 0 <= cx < nx and 0 <= cy < ny and obst[cy, cx]:
                    return True
        return False
    if dy == 0.0 and abs((gy0 + 0.5) - math.floor(gy0 + 0.5)) < 1e-12:
        lo = min(cx0, cx1)
        hi = max(cx0, cx1)
        for cx in range(lo, hi + 1):
            if cx == cx0 or cx == cx1:
                continue
            for cy in (cy0, cy0 - 1):
                if 0 <= cx < nx and 0 <= cy < ny and obst[cy, cx]:
                    return True
        return False

    stepx = 0
    stepy = 0
    tdx = 1e30
    tdy = 1e30
    tmx = 1e30
    tmy = 1e30
    if dx > 0.0:
        stepx = 1
    elif dx < 0.0:
        stepx = -1
    if dy > 0.0:
        stepy = 1
    elif dy < 0.0:
        stepy = -1
    if stepx != 0:
        tdx = abs(1.0 / dx)
        tmx = ((cx0 + 0.5 * stepx) - gx0) / dx
    if stepy != 0:
        tdy = abs(1.0 / dy)
        tmy = ((cy0 + 0.5 * stepy) - gy0) / dy

    cx = cx0
    cy = cy0
    max_iter = 2 * (abs(cx1 - cx0) + abs(cy1 - cy0)) + 8
    for _ in range(max_iter):
        if cx == cx1 and cy == cy1:
            break
        if abs(tmx - tmy) < 1e-12 and stepx != 0 and stepy != 0:
            # Exact corner crossing: the two side cells are touched too.
            sx = cx + stepx
            sy = cy + stepy
            if 0 <= sx < nx and 0 <= cy < ny and obst[cy, sx]:
                if not (sx == cx0 and cy == cy0) and not (sx == cx1 and cy == cy1):
                    return True
            if 0 <= cx < nx and 0 <= sy < ny and obst[sy, cx]:
                if not (cx == cx0 and sy == cy0) and not (cx == cx1 and sy == cy1):
                    return True
            cx += stepx
            cy += stepy
            tmx += tdx
            tmy += tdy
        elif tmx < tmy:
            cx += stepx
            tmx += tdx
        else:
            cy += stepy
            tmy += tdy
        if 0 <= cx < nx and 0 <= cy < ny and obst[cy, cx]:
            if not (cx == cx0 and cy == cy0) and not (cx == cx1 and cy == cy1):
                return True
    return False


# ---------------------------------------------------------------------------
# camera scope predicates
# ---------------------------------------------------------------------------

@kernel
def point_in_scope(px, py, camx, camy, beta, alpha, ox, oy, h, obst):
    """Wedge membership plus unobstructed line of sight for one camera."""
    dx = px - camx
    dy = py - camy
    if dx == 0.0 and dy == 0.0:
        return True  # camera sees its own position by convention
    bearing = math.atan2(dx, dy)
    if bearing < 0.0:
        bearing += 2.0 * math.pi
    delta = bearing - beta
    if delta < 0.0:
        delta += 2.0 * math.pi
    if delta > alpha + _ANG_EPS:
        return False
    return not segment_blocked(
        (camx - ox) / h, (camy - oy) / h, (px - ox) / h, (py - oy) / h, obst
    )


@kernel
def scope_mask_kernel(nx, ny, ox, oy, h, camx, camy, beta, alpha, obst):
    out = np.zeros((ny, nx), np.bool_)
    for iy in range(ny):
        for ix in range(nx):
            if obst[iy, ix]:
                continue
            px = ox + ix * h
            py = oy + iy * h
            out[iy, ix] = point_in_scope(
                px, py, camx, camy, beta, alpha, ox, oy, h, obst
            )
    return out


@kernel
def points_in_scope_any(pxs, pys, camx, camy, beta, alpha, ox, oy, h, obst):
    """Union-of-scopes membership for a batch of points over all cameras."""
    n = pxs.shape[0]
    ncam = camx.shape[0]
    out = np.zeros(n, np.bool_)
    for i in range(n):
        for c in range(ncam):
            if point_in_scope(
                pxs[i], pys[i], camx[c], camy[c], beta[c], alpha[c], ox, oy, h, obst
            ):
                out[i] = True
                break
    return out


# ---------------------------------------------------------------------------
# 4-connected Dijkstra
# ---------------------------------------------------------------------------

@kernel
def dijkstra_kernel(nx, ny, we, wv, ok, dest):
    """Shortest-path tree rooted at ``dest`` on the 4-connected grid.

    ``we[iy, ix]`` weights the edge (ix,iy)-(ix+1,iy); ``wv[iy, ix]`` the
    edge (ix,iy)-(ix,iy+1). Nodes with ``ok`` false are deleted. Returns
    (u, pred, accepted-values log).
    """
    n = nx * ny
    u = np.full(n, np.inf)
    pred = np.full(n, -1, np.int64)
    done = np.zeros(n, np.uint8)
    accepted = np.empty(n, np.float64)
    acount = 0

    cap = 4 * n + 16
    hkeys = np.empty(cap, np.float64)
    hvals = np.empty(cap, np.int64)
    hsize = 0

    if not ok[dest]:
        return u, pred, accepted[:0]
    u[dest] = 0.0
    hsize = _heap_push(hkeys, hvals, hsize, 0.0, dest)

    while hsize > 0:
        key, idx, hsize = _heap_pop(hkeys, hvals, hsize)
        if done[idx] == 1 or key != u[idx]:
            continue
        done[idx] = 1
        accepted[acount] = key
        acount += 1
        ix = idx % nx
        iy = idx // nx
        for k in range(4):
            if k == 0:
                jx = ix + 1
                jy = iy
                w = we[iy, ix] if ix + 1 < nx else np.inf
            elif k == 1:
                jx = ix - 1
                jy = iy
                w = we[iy, ix - 1] if ix - 1 >= 0 else np.inf
            elif k == 2:
                jx = ix
                jy = iy + 1
                w = wv[iy, ix] if iy + 1 < ny else np.inf
            else:
                jx = ix
                jy = iy - 1
                w = wv[iy - 1, ix] if iy - 1 >= 0 else np.inf
            if jx < 0 or jx >= nx or jy < 0 or jy >= ny:
                continue
            j = jy * nx + jx
            if not ok[j] or done[j] == 1 or not np.isfinite(w):
                continue
            cand = key + w
            if cand < u[j]:
                u[j] = cand
                pred[j] = idx
                if hsize >= hkeys.shape[0]:
                    nk = np.empty(hkeys.shape[0] * 2, np.float64)
                    nv = np.empty(hkeys.shape[0] * 2, np.int64)
                    nk[:hsize] = hkeys[:hsize]
                    nv[:hsize] = hvals[:hsize]
                    hkeys = nk
                    hvals = nv
                hsize = _heap_push(hkeys, hvals, hsize, cand, j)
    return u, pred, accepted[:acount]


# ---------------------------------------------------------------------------
# anisotropic simplex update
# ---------------------------------------------------------------------------

@kernel
def simplex_candidate(ejx, ejy, ekx, eky, uj, uk, wx, wy, va):
    """Quadratic front-arrival solve on the simplex spanned by edges e_j, e_k.

    Edges point from the updated node X to the two known-value nodes. Returns
    (value, characteristic_inside, A, B, C, has_real_root). The gradient model
    is grad u = P^{-1}(alpha*v + beta) with alpha = (-1,-1)^T and
    beta = (uj, uk)^T, P rows being the edge vectors.
    """
    det = ejx * eky - ejy * ekx
    if abs(det) < 1e-14:
        return np.inf, False, 0.0, 0.0, 0.0, False
    if not (np.isfinite(uj) and np.isfinite(uk)):
        return np.inf, False, 0.0, 0.0, 0.0, False
    # q = P^{-1} alpha, b = P^{-1} beta
    qx = (ejy - eky) / det
    qy = (ekx - ejx) / det
    bx = (eky * uj - ejy * uk) / det
    by = (-ekx * uj + ejx * uk) / det

    qq = qx * qx + qy * qy
    qw = qx * wx + qy * wy
    qb = qx * bx + qy * by
    bw = bx * wx + by * wy
    bb = bx * bx + by * by

    a_coef = va * va * qq - qw * qw
    b_coef = 2.0 * va * va * qb - 2.0 * qw * (bw + 1.0)
    c_coef = va * va * bb - (bw + 1.0) * (bw + 1.0)

    if a_coef <= 1e-300:
        # Ruled out by the wind magnitude cap; guard against degeneracy anyway.
        return np.inf, False, a_coef, b_coef, c_coef, False
    disc = b_coef * b_coef - 4.0 * a_coef * c_coef
    if disc < 0.0:
        return np.inf, False, a_coef, b_coef, c_coef, False
    v = (-b_coef + math.sqrt(disc)) / (2.0 * a_coef)

    gx = qx * v + bx
    gy = qy * v + by
    gn = math.sqrt(gx * gx + gy * gy)
    if gn < 1e-300:
        return v, False, a_coef, b_coef, c_coef, True
    dirx = -va * gx / gn + wx
    diry = -va * gy / gn + wy
    # Characteristic must be a non-negative combination of the edge vectors.
    c1 = (eky * dirx - ekx * diry) / det
    c2 = (-ejy * dirx + ejx * diry) / det
    inside = c1 >= -_CONE_EPS and c2 >= -_CONE_EPS
    return v, inside, a_coef, b_coef, c_coef, True


@kernel
def _on_accepted_front(state, ok, ix, iy, nx, ny):
    """Accepted node that still borders a non-accepted usable node.

    Restricting update sources to the accepted front is what keeps far
    candidate segments honest: an interior accepted node (the destination,
    say) would offer straight-line hops that skip over slow regions the
    front has to pay for.
    """
    for k in range(6):
        if k == 0:
            jx = ix + 1; jy = iy
        elif k == 1:
            jx = ix - 1; jy = iy
        elif k == 2:
            jx = ix; jy = iy + 1
        elif k == 3:
            jx = ix; jy = iy - 1
        elif k == 4:
            jx = ix + 1; jy = iy + 1
        else:
            jx = ix - 1; jy = iy - 1
        if jx < 0 or jx >= nx or jy < 0 or jy >= ny:
            continue
        j = jy * nx + jx
        if ok[j] and state[j] != ACCEPTED:
            return True
    return False


@kernel
def _edge_candidate(tx, ty, ax, ay, ua, wx, wy, va):
    """One-sided arrival time at (tx, ty) along the straight edge from a."""
    dx = tx - ax
    dy = ty - ay
    d = math.sqrt(dx * dx + dy * dy)
    if d <= 0.0:
        return np.inf
    f = va - (dx * wx + dy * wy) / d
    if f <= 1e-15:
        return np.inf
    return ua + d / f


# ---------------------------------------------------------------------------
# ordered-upwind front expansion
# ---------------------------------------------------------------------------

@kernel
def oum_kernel(nx, ny, h, ox, oy, wx, wy, va, ok, xi, dest_ix, dest_iy,
               gamma, gate_los, obst):
    """Label-setting solve of the anisotropic minimum-time equation.

    Mesh: regular grid, each cell split along its main diagonal, giving the
    six-neighbour stencil (+x, -x, +y, -y, +diag, -diag). Candidate updates
    for a node scan accepted nodes within the anisotropy-bounded radius
    ``gamma*h`` and combine simplex solves with one-sided edge fallbacks.
    ``xi`` scales the front speed per node (soft obstacles); ``ok`` deletes
    nodes outright. When ``gate_los`` is set, non-adjacent candidate segments
    must not cross obstacle cells.
    """
    n = nx * ny
    u = np.full(n, np.inf)
    state = np.zeros(n, np.uint8)
    pred1 = np.full(n, -1, np.int64)
    pred2 = np.full(n, -1, np.int64)
    accepted = np.empty(n, np.float64)
    acount = 0

    mdx = np.empty(6, np.int64)
    mdy = np.empty(6, np.int64)
    mdx[0] = 1; mdy[0] = 0
    mdx[1] = -1; mdy[1] = 0
    mdx[2] = 0; mdy[2] = 1
    mdx[3] = 0; mdy[3] = -1
    mdx[4] = 1; mdy[4] = 1
    mdx[5] = -1; mdy[5] = -1

    cap = 8 * n + 64
    hkeys = np.empty(cap, np.float64)
    hvals = np.empty(cap, np.int64)
    hsize = 0

    dest = dest_iy * nx + dest_ix
    if not ok[dest]:
        return u, state, pred1, pred2, accepted[:0]
    u[dest] = 0.0
    state[dest] = ACCEPTED
    accepted[acount] = 0.0
    acount += 1

    # Stencil radius: at least the diagonal edge length so every incident
    # mesh simplex stays reachable in the isotropic case.
    radius = max(gamma, math.sqrt(2.0)) * h * (1.0 + 1e-9)
    rc = int(math.ceil(radius / h))

    # Seed the eight surrounding nodes with straight-ray arrivals from the
    # destination: removes the point-source error of pure simplex updates.
    for dy in range(-1, 2):
        for dx in range(-1, 2):
            if dx == 0 and dy == 0:
                continue
            jx = dest_ix + dx
            jy = dest_iy + dy
            if jx < 0 or jx >= nx or jy < 0 or jy >= ny:
                continue
            j = jy * nx + jx
            if not ok[j]:
                continue
            scale = 1.0 - xi[j]
            cand = _edge_candidate(
                ox + jx * h, oy + jy * h, ox + dest_ix * h, oy + dest_iy * h,
                0.0, scale * wx[j], scale * wy[j], scale * va,
            )
            if cand < u[j]:
                u[j] = cand
                pred1[j] = dest
                pred2[j] = -1
                state[j] = CONSIDERED
                hsize = _heap_push(hkeys, hvals, hsize, cand, j)

    while hsize > 0:
        key, idx, hsize = _heap_pop(hkeys, hvals, hsize)
        if state[idx] == ACCEPTED or key != u[idx]:
            continue
        state[idx] = ACCEPTED
        accepted[acount] = key
        acount += 1
        aix = idx % nx
        aiy = idx // nx

        # Promote far mesh neighbours and give them a full stencil scan.
        for k in range(6):
            jx = aix + mdx[k]
            jy = aiy + mdy[k]
            if jx < 0 or jx >= nx or jy < 0 or jy >= ny:
                continue
            j = jy * nx + jx
            if not ok[j] or state[j] != FAR:
                continue
            state[j] = CONSIDERED
            tx = ox + jx * h
            ty = oy + jy * h
            scale = 1.0 - xi[j]
            wtx = scale * wx[j]
            wty = scale * wy[j]
            vat = scale * va
            best = np.inf
            bp1 = -1
            bp2 = -1
            for sy in range(max(0, jy - rc), min(ny, jy + rc + 1)):
                for sx in range(max(0, jx - rc), min(nx, jx + rc + 1)):
                    s = sy * nx + sx
                    if state[s] != ACCEPTED:
                        continue
                    if not _on_accepted_front(state, ok, sx, sy, nx, ny):
                        continue
                    ddx = float(sx - jx)
                    ddy = float(sy - jy)
                    d2 = ddx * ddx + ddy * ddy
                    if d2 == 0.0 or d2 * h * h > radius * radius:
                        continue
                    if gate_los and d2 > 2.0001:
                        if segment_blocked(float(jx), float(jy),
                                           float(sx), float(sy), obst):
                            continue
                    axp = ox + sx * h
                    ayp = oy + sy * h
                    cand = _edge_candidate(tx, ty, axp, ayp, u[s], wtx, wty, vat)
                    if cand < best:
                        best = cand
                        bp1 = s
                        bp2 = -1
                    for m in range(6):
                        zx = sx + mdx[m]
                        zy = sy + mdy[m]
                        if zx < 0 or zx >= nx or zy < 0 or zy >= ny:
                            continue
                        z = zy * nx + zx
                        if z == j or state[z] != ACCEPTED:
                            continue
                        zdx = float(zx - jx)
                        zdy = float(zy - jy)
                        if gate_los and zdx * zdx + zdy * zdy > 2.0001:
                            if segment_blocked(float(jx), float(jy),
                                               float(zx), float(zy), obst):
                                continue
                        v, inside, _, _, _, has = simplex_candidate(
                            axp - tx, ayp - ty,
                            (ox + zx * h) - tx, (oy + zy * h) - ty,
                            u[s], u[z], wtx, wty, vat,
                        )
                        if has and inside and v < best:
                            best = v
                            bp1 = s
                            bp2 = z
            if best < u[j]:
                u[j] = best
                pred1[j] = bp1
                pred2[j] = bp2
                if hsize >= hkeys.shape[0]:
                    nk = np.empty(hkeys.shape[0] * 2, np.float64)
                    nv = np.empty(hkeys.shape[0] * 2, np.int64)
                    nk[:hsize] = hkeys[:hsize]
                    nv[:hsize] = hvals[:hsize]
                    hkeys = nk
                    hvals = nv
                hsize = _heap_push(hkeys, hvals, hsize, best, j)

        # Re-examine considered nodes that can now use segments through idx.
        if not _on_accepted_front(state, ok, aix, aiy, nx, ny):
            continue
        axp = ox + aix * h
        ayp = oy + aiy * h
        for sy in range(max(0, aiy - rc), min(ny, aiy + rc + 1)):
            for sx in range(max(0, aix - rc), min(nx, aix + rc + 1)):
                t = sy * nx + sx
                if state[t] != CONSIDERED:
                    continue
                ddx = float(sx - aix)
                ddy = float(sy - aiy)
                d2 = ddx * ddx + ddy * ddy
                if d2 == 0.0 or d2 * h * h > radius * radius:
                    continue
                if gate_los and d2 > 2.0001:
                    if segment_blocked(float(sx), float(sy),
                                       float(aix), float(aiy), obst):
                        continue
                tx = ox + sx * h
                ty = oy + sy * h
                scale = 1.0 - xi[t]
                wtx = scale * wx[t]
                wty = scale * wy[t]
                vat = scale * va
                best = u[t]
                bp1 = -1
                bp2 = -1
                cand = _edge_candidate(tx, ty, axp, ayp, key, wtx, wty, vat)
                if cand < best:
                    best = cand
                    bp1 = idx
                    bp2 = -1
                for m in range(6):
                    zx = aix + mdx[m]
                    zy = aiy + mdy[m]
                    if zx < 0 or zx >= nx or zy < 0 or zy >= ny:
                        continue
                    z = zy * nx + zx
                    if z == t or state[z] != ACCEPTED:
                        continue
                    zdx = float(zx - sx)
                    zdy = float(zy - sy)
                    if gate_los and zdx * zdx + zdy * zdy > 2.0001:
                        if segment_blocked(float(sx), float(sy),
                                           float(zx), float(zy), obst):
                            continue
                    v, inside, _, _, _, has = simplex_candidate(
                        axp - tx, ayp - ty,
                        (ox + zx * h) - tx, (oy + zy * h) - ty,
                        key, u[z], wtx, wty, vat,
                    )
                    if has and inside and v < best:
                        best = v
                        bp1 = idx
                        bp2 = z
                if best < u[t]:
                    u[t] = best
                    pred1[t] = bp1
                    pred2[t] = bp2
                    if hsize >= hkeys.shape[0]:
                        nk = np.empty(hkeys.shape[0] * 2, np.float64)
                        nv = np.empty(hkeys.shape[0] * 2, np.int64)
                        nk[:hsize] = hkeys[:hsize]
                        nv[:hsize] = hvals[:hsize]
                        hkeys = nk
                        hvals = nv
                    hsize = _heap_push(hkeys, hvals, hsize, best, t)

    return u, state, pred1, pred2, accepted[:acount]
