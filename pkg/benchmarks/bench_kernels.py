#!/usr/bin/env python3
"""Benchmark the jitted kernels against their pure-Python fallbacks.

Runs the three hot kernels (scope rasterization, grid Dijkstra, ordered
upwind) on a representative scene at a few grid sizes and reports the
median time per call for each backend plus the speedup. The fallback is
the same source executed un-jitted, so outputs are identical; this script
asserts that while timing.

Usage: python benchmarks/bench_kernels.py [--sizes 20,40,80] [--repeats 5]
"""

import argparse
import math
import statistics
import time

import numpy as np

import camplace as cp
from camplace import _kernels
from camplace._backend import NUMBA_ENABLED, python_impl
from camplace.scene import rasterize_obstacles


def _timeit(fn, args, repeats):
    fn(*args)  # warm (jit compile / cache load)
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def _scene(n):
    size = float(n - 1)
    region = cp.Region(0.0, size, 0.0, size)
    scene = cp.Scene(
        region=region,
        obstacles=(cp.Obstacle.from_rect(size * 0.4, size * 0.6,
                                         size * 0.2, size * 0.7),),
        cameras=(
            cp.Camera(x=size * 0.8, y=size * 0.15, beta=5 * math.pi / 4,
                      alpha=math.pi / 2),
            cp.Camera(x=size * 0.1, y=size * 0.9, beta=math.pi,
                      alpha=math.pi / 3),
        ),
    )
    grid = cp.GridSpec.from_region(region, n, n)
    return scene, grid


def bench(sizes, repeats):
    rows = []
    for n in sizes:
        scene, grid = _scene(n)
        mask = rasterize_obstacles(scene.obstacles, grid)
        dest = (grid.origin[0] + (grid.nx - 1) * grid.h,
                grid.origin[1] + (grid.ny - 1) * grid.h)

        cam = scene.cameras[0]
        scope_args = (grid.nx, grid.ny, grid.origin[0], grid.origin[1],
                      grid.h, cam.x, cam.y, cam.beta, cam.alpha, mask)
        rows.append((f"scope_mask {n}x{n}", _kernels.scope_mask_kernel,
                     scope_args))

        xs, ys = grid.xy_arrays()
        from camplace.scene import points_in_any_scope
        mx_e = (xs[:, :-1] + xs[:, 1:]) * 0.5
        vis_e = points_in_any_scope(scene, grid, mx_e.ravel(),
                                    ys[:, :-1].ravel(), mask
                                    ).reshape(mx_e.shape)
        my_v = (ys[:-1, :] + ys[1:, :]) * 0.5
        vis_v = points_in_any_scope(scene, grid, xs[:-1, :].ravel(),
                                    my_v.ravel(), mask).reshape(my_v.shape)
        we = np.ascontiguousarray(
            np.where(vis_e, grid.h * 2.0, grid.h))
        wv = np.ascontiguousarray(
            np.where(vis_v, grid.h * 2.0, grid.h))
        ok = np.ascontiguousarray(~mask.ravel())
        dij_args = (grid.nx, grid.ny, we, wv, ok,
                    grid.flat(grid.nx - 1, grid.ny - 1))
        rows.append((f"dijkstra {n}x{n}", _kernels.dijkstra_kernel, dij_args))

        wind = cp.build_wind_field(scene, dest, grid)
        gamma = cp.anisotropy_ratio(wind, scene.base_speed, ~mask)
        oum_args = (grid.nx, grid.ny, grid.h, grid.origin[0], grid.origin[1],
                    np.ascontiguousarray(wind.vectors[..., 0].ravel()),
                    np.ascontiguousarray(wind.vectors[..., 1].ravel()),
                    scene.base_speed, ok, np.zeros(grid.n_nodes),
                    grid.nx - 1, grid.ny - 1, gamma, True, mask)
        rows.append((f"ordered_upwind {n}x{n}", _kernels.oum_kernel,
                     oum_args))

    print(f"{'kernel':<24} {'jitted':>12} {'python':>12} {'speedup':>9}")
    print("-" * 60)
    for name, fn, args in rows:
        t_py, out_py = _timeit(python_impl(fn), args, repeats)
        if NUMBA_ENABLED:
            t_jit, out_jit = _timeit(fn, args, repeats)
            _assert_equal(out_jit, out_py)
            print(f"{name:<24} {t_jit * 1e3:>10.3f}ms {t_py * 1e3:>10.3f}ms "
                  f"{t_py / t_jit:>8.1f}x")
        else:
            print(f"{name:<24} {'-':>12} {t_py * 1e3:>10.3f}ms {'-':>9}")
    if not NUMBA_ENABLED:
        print("\nnumba backend disabled (CAMPLACE_NUMBA=0 or not installed); "
              "only the fallback was timed.")


def _assert_equal(a, b):
    if isinstance(a, tuple):
        for x, y in zip(a, b):
            _assert_equal(x, y)
        return
    if isinstance(a, np.ndarray):
        assert np.array_equal(a, b), "backend outputs diverged"
    else:
        assert a == b, "backend outputs diverged"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="20,40,80",
                        help="comma-separated grid sizes")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    bench(sizes, args.repeats)


if __name__ == "__main__":
    main()
