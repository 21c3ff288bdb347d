import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import camplace as cp
from camplace import _kernels
from camplace.scene import rasterize_obstacles

from helpers import random_scene, supercover_blocked_oracle

PI = math.pi


def _cam(x=0.0, y=0.0, beta=0.0, alpha=PI):
    return cp.Camera(x=x, y=y, beta=beta, alpha=alpha)


def _grid(n=9, lo=-4.0):
    region = cp.Region(lo, lo + n - 1, lo, lo + n - 1)
    return region, cp.GridSpec.from_region(region, n, n)


class TestBearing:
    def test_north_is_zero(self):
        assert cp.bearing_from_camera(_cam(), (0.0, 1.0)) == 0.0

    def test_east_is_quarter_turn(self):
        assert cp.bearing_from_camera(_cam(), (1.0, 0.0)) == pytest.approx(PI / 2)

    def test_west_is_three_quarter_turn(self):
        assert cp.bearing_from_camera(_cam(), (-1.0, 0.0)) == pytest.approx(3 * PI / 2)

    def test_range(self):
        rng = np.random.default_rng(7)
        cam = _cam(x=1.3, y=-2.2)
        for _ in range(200):
            p = tuple(rng.uniform(-5, 5, size=2))
            if p == cam.position:
                continue
            b = cp.bearing_from_camera(cam, p)
            assert 0.0 <= b < 2 * PI


class TestInScope:
    def test_half_plane_wedge_accepts_diagonal(self):
        region, grid = _grid()
        assert cp.in_scope(_cam(alpha=PI), (1.0, 1.0), (), grid)

    def test_quarter_wedge_rejects_northwest(self):
        region, grid = _grid()
        assert not cp.in_scope(_cam(alpha=PI / 2), (-1.0, 1.0), (), grid)

    def test_obstacle_cell_blocks_sight(self):
        region, grid = _grid()
        obs = (cp.Obstacle.from_cells([grid.nearest_node(0.0, 1.0)]),)
        assert not cp.in_scope(_cam(alpha=PI), (0.0, 2.0), obs, grid)
        assert cp.in_scope(_cam(alpha=PI), (0.0, 2.0), (), grid)

    def test_camera_position_in_scope_by_convention(self):
        region, grid = _grid()
        cam = _cam(alpha=0.1)
        assert cp.in_scope(cam, cam.position, (), grid)

    def test_boundary_ray_is_included(self):
        region, grid = _grid()
        cam = _cam(beta=0.0, alpha=PI / 2)
        assert cp.in_scope(cam, (0.0, 2.0), (), grid)   # first ray
        assert cp.in_scope(cam, (2.0, 0.0), (), grid)   # last ray

    def test_angular_wraparound(self):
        region, grid = _grid()
        eps = 0.1
        cam = _cam(beta=2 * PI - eps, alpha=2 * eps)
        r = 2.0
        for offset, expected in ((-eps / 2, True), (eps / 2, True),
                                 (2 * eps, False), (PI, False)):
            ang = offset % (2 * PI)
            point = (r * math.sin(ang), r * math.cos(ang))
            assert cp.in_scope(cam, point, (), grid) is expected

    def test_rotation_consistency(self):
        region, grid = _grid()
        rng = np.random.default_rng(3)
        for _ in range(300):
            beta = rng.uniform(0, 2 * PI)
            alpha = rng.uniform(0.2, 2 * PI - 0.2)
            delta = rng.uniform(0, 2 * PI)
            ang = rng.uniform(0, 2 * PI)
            # Skip bearings within a whisker of the wedge boundary.
            gap = (ang - (beta + delta)) % (2 * PI)
            if min(abs(gap), abs(gap - alpha), abs(gap - 2 * PI)) < 1e-6:
                continue
            r = rng.uniform(0.2, 3.5)
            p = (r * math.sin(ang), r * math.cos(ang))
            p_rot = (r * math.sin(ang - delta), r * math.cos(ang - delta))
            a = cp.in_scope(_cam(beta=(beta + delta) % (2 * PI), alpha=alpha),
                            p, (), grid)
            b = cp.in_scope(_cam(beta=beta, alpha=alpha), p_rot, (), grid)
            assert a == b


class TestScopeMask:
    def test_full_circle_sees_every_free_node(self):
        scene, grid = random_scene(np.random.default_rng(5), max_n=10,
                                   n_cameras=0)
        cam = _cam(x=2.0, y=2.0, alpha=2 * PI, beta=1.0)
        mask = cp.scope_mask(cam, grid, scene.obstacles)
        obst = rasterize_obstacles(scene.obstacles, grid)
        if scene.obstacles:
            # Occlusion may hide nodes, but every unblocked one is seen.
            assert not mask[obst].any()
        else:
            assert mask.all()

    def test_degenerate_wedge_sees_only_first_ray(self):
        region, grid = _grid(9, lo=-4.0)
        cam = _cam(x=0.0, y=0.0, beta=0.0, alpha=1e-9)
        mask = cp.scope_mask(cam, grid, ())
        seen = {tuple(idx) for idx in np.argwhere(mask)}
        cx, cy = grid.nearest_node(0.0, 0.0)
        expected = {(iy, cx) for iy in range(cy, grid.ny)}
        assert seen == expected

    def test_matches_pointwise_in_scope(self):
        rng = np.random.default_rng(11)
        for _ in range(6):
            scene, grid = random_scene(rng, max_n=10, n_cameras=2)
            for cam in scene.cameras:
                mask = cp.scope_mask(cam, grid, scene.obstacles)
                obst = rasterize_obstacles(scene.obstacles, grid)
                for iy in range(grid.ny):
                    for ix in range(grid.nx):
                        point = grid.node_xy(ix, iy)
                        expected = (not obst[iy, ix]) and cp.in_scope(
                            cam, point, scene.obstacles, grid)
                        assert mask[iy, ix] == expected

    def test_corner_camera_occlusion_shadow(self):
        region = cp.Region(0, 19, 0, 19)
        grid = cp.GridSpec.from_region(region, 20, 20)
        obstacles = (cp.Obstacle.from_rect(8, 10, 8, 10),)
        cam = cp.Camera(x=0.0, y=0.0, beta=0.0, alpha=PI / 2)
        mask = cp.scope_mask(cam, grid, obstacles)
        obst = rasterize_obstacles(obstacles, grid)
        # Directly behind the block along the diagonal: occluded.
        assert not mask[15, 15]
        assert mask[15, 2] and mask[2, 15]
        assert not mask[obst].any()
        # Shadow equals the pointwise oracle everywhere.
        for iy in range(grid.ny):
            for ix in range(grid.nx):
                point = grid.node_xy(ix, iy)
                expected = (not obst[iy, ix]) and cp.in_scope(
                    cam, point, obstacles, grid)
                assert mask[iy, ix] == expected

    def test_occlusion_monotone_under_added_obstacles(self):
        rng = np.random.default_rng(23)
        for _ in range(10):
            scene, grid = random_scene(rng, max_n=10, n_cameras=1)
            if not scene.cameras:
                continue
            cam = scene.cameras[0]
            base = cp.scope_mask(cam, grid, scene.obstacles)
            extra_cell = (int(rng.integers(grid.nx)), int(rng.integers(grid.ny)))
            cix, ciy = grid.nearest_node(cam.x, cam.y)
            if extra_cell == (cix, ciy):
                continue
            more = scene.obstacles + (cp.Obstacle.from_cells([extra_cell]),)
            bigger = cp.scope_mask(cam, grid, more)
            assert not (bigger & ~base).any()


class TestSupercover:
    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_matches_exhaustive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        ny, nx = 9, 11
        obst = rng.random((ny, nx)) < 0.25
        g0 = (rng.uniform(-1, nx), rng.uniform(-1, ny))
        g1 = (rng.uniform(-1, nx), rng.uniform(-1, ny))
        got = _kernels.segment_blocked(g0[0], g0[1], g1[0], g1[1], obst)
        want = supercover_blocked_oracle(g0, g1, obst)
        assert bool(got) == want

    def test_axis_aligned_between_nodes(self):
        obst = np.zeros((5, 5), dtype=bool)
        obst[2, 2] = True
        # Straight through the obstacle node row: blocked.
        assert _kernels.segment_blocked(0.0, 2.0, 4.0, 2.0, obst)
        # One row up, through cell interiors only: clear.
        assert not _kernels.segment_blocked(0.0, 3.0, 4.0, 3.0, obst)

    def test_boundary_aligned_segment_sees_both_rows(self):
        obst = np.zeros((5, 5), dtype=bool)
        obst[2, 2] = True
        # y = 2.5 runs exactly between rows 2 and 3: both count.
        assert _kernels.segment_blocked(0.0, 2.5, 4.0, 2.5, obst)
        obst[2, 2] = False
        obst[3, 2] = True
        assert _kernels.segment_blocked(0.0, 2.5, 4.0, 2.5, obst)

    def test_corner_pinch_blocks_diagonal(self):
        obst = np.zeros((4, 4), dtype=bool)
        obst[1, 0] = True
        obst[0, 1] = True
        assert _kernels.segment_blocked(0.0, 0.0, 2.0, 2.0, obst)

    def test_endpoint_cells_excluded(self):
        obst = np.zeros((4, 4), dtype=bool)
        obst[0, 0] = True
        obst[2, 2] = True
        assert not _kernels.segment_blocked(0.0, 0.0, 2.0, 2.0, obst)


class TestSceneIO:
    def _scene_dict(self):
        return {
            "region": {"x_min": 0, "x_max": 9, "y_min": 0, "y_max": 9},
            "base_speed": 1.5,
            "obstacles": [
                {"type": "rect", "x_min": 3, "x_max": 5, "y_min": 3, "y_max": 5},
                {"type": "cells", "cells": [[0, 5], [1, 5]]},
                {"type": "polygon", "vertices": [[6, 6], [8, 6], [8, 8]]},
            ],
            "cameras": [
                {"x": 1.0, "y": 1.0, "beta": 0.5, "alpha": 1.0,
                 "falloff_exponent": 2.0},
            ],
        }

    def test_roundtrip(self, tmp_path):
        scene = cp.scene_from_dict(self._scene_dict())
        path = tmp_path / "scene.json"
        cp.save_scene(scene, path)
        again = cp.load_scene(path)
        assert again == scene

    def test_unknown_top_level_key_named(self):
        d = self._scene_dict()
        d["speed"] = 3
        with pytest.raises(cp.SceneValidationError, match="'speed'"):
            cp.scene_from_dict(d)

    def test_unknown_camera_key_named(self):
        d = self._scene_dict()
        d["cameras"][0]["fov"] = 1.0
        with pytest.raises(cp.SceneValidationError, match="'fov'"):
            cp.scene_from_dict(d)

    def test_unknown_obstacle_key_named(self):
        d = self._scene_dict()
        d["obstacles"][0]["height"] = 2
        with pytest.raises(cp.SceneValidationError, match="'height'"):
            cp.scene_from_dict(d)

    def test_missing_region_key(self):
        d = self._scene_dict()
        del d["region"]["x_min"]
        with pytest.raises(cp.SceneValidationError, match="x_min"):
            cp.scene_from_dict(d)

    def test_inverted_region_rejected(self):
        with pytest.raises(cp.SceneValidationError):
            cp.Region(1.0, 0.0, 0.0, 1.0)

    def test_bad_alpha_rejected(self):
        with pytest.raises(cp.SceneValidationError):
            cp.Camera(x=0, y=0, beta=0.0, alpha=0.0)
        with pytest.raises(cp.SceneValidationError):
            cp.Camera(x=0, y=0, beta=0.0, alpha=7.0)

    def test_beta_normalized(self):
        cam = cp.Camera(x=0, y=0, beta=-PI / 2, alpha=1.0)
        assert cam.beta == pytest.approx(3 * PI / 2)

    def test_camera_outside_region_rejected(self):
        with pytest.raises(cp.SceneValidationError):
            cp.Scene(region=cp.Region(0, 1, 0, 1),
                     cameras=(cp.Camera(x=5, y=0, beta=0, alpha=1),))

    def test_nonpositive_speed_rejected(self):
        with pytest.raises(cp.SceneValidationError):
            cp.Scene(region=cp.Region(0, 1, 0, 1), base_speed=0.0)

    def test_camera_on_obstacle_rejected_on_grid(self):
        scene = cp.Scene(
            region=cp.Region(0, 9, 0, 9),
            obstacles=(cp.Obstacle.from_rect(4, 6, 4, 6),),
            cameras=(cp.Camera(x=5, y=5, beta=0, alpha=1),),
        )
        grid = cp.GridSpec.from_region(scene.region, 10, 10)
        with pytest.raises(cp.SceneValidationError, match="obstacle"):
            cp.grid_dijkstra(scene, (0.0, 0.0), 1.0, grid)

    def test_obstacle_cell_outside_grid_rejected(self):
        scene = cp.Scene(region=cp.Region(0, 4, 0, 4),
                         obstacles=(cp.Obstacle.from_cells([(9, 9)]),))
        grid = cp.GridSpec.from_region(scene.region, 5, 5)
        with pytest.raises(cp.SceneValidationError, match="outside"):
            rasterize_obstacles(scene.obstacles, grid)

    def test_bad_json_rejected(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json", encoding="utf-8")
        with pytest.raises(cp.SceneValidationError):
            cp.load_scene(p)


class TestGridSpec:
    def test_mismatched_aspect_rejected(self):
        region = cp.Region(0, 2, 0, 1)
        with pytest.raises(cp.SceneValidationError, match="square"):
            cp.GridSpec.from_region(region, 20, 20)

    def test_nearest_node_clamps(self):
        grid = cp.GridSpec.from_region(cp.Region(0, 9, 0, 9), 10, 10)
        assert grid.nearest_node(-3.0, 100.0) == (0, 9)

    def test_too_small_rejected(self):
        with pytest.raises(cp.SceneValidationError):
            cp.GridSpec(nx=1, ny=5, h=1.0)
