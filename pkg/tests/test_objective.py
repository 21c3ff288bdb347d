import math

import numpy as np
import pytest

import camplace as cp

from helpers import random_scene

PI = math.pi


def _empty(n):
    region = cp.Region(0.0, float(n - 1), 0.0, float(n - 1))
    grid = cp.GridSpec.from_region(region, n, n)
    return cp.Scene(region=region), grid


def _annotated_path(points, scene, grid):
    path = cp.Path(points=np.asarray(points, dtype=float), total_time=0.0)
    return cp.annotate_visibility(path, scene, grid)


class TestPathCost:
    def test_straight_unwatched_path_costs_one(self):
        scene, grid = _empty(5)
        path = _annotated_path([[0, 0], [4, 0]], scene, grid)
        assert cp.path_cost(path, eta=3.0) == pytest.approx(1.0)

    def test_fully_watched_straight_path(self):
        scene, grid = _empty(5)
        scene = scene.with_cameras([cp.Camera(x=2, y=2, beta=0,
                                              alpha=2 * PI)])
        path = _annotated_path([[0, 0], [4, 0]], scene, grid)
        assert cp.path_cost(path, eta=1.0) == pytest.approx(2.0)

    def test_manhattan_over_euclidean_normalizer(self):
        scene, grid = _empty(3)
        field = cp.grid_dijkstra(scene, (2.0, 2.0), 0.0, grid)
        path = cp.extract_path_discrete(field, (0.0, 0.0))
        cp.annotate_visibility(path, scene, grid)
        assert cp.path_cost(path, eta=0.0) == pytest.approx(
            4.0 / (2 * math.sqrt(2)), rel=1e-12)

    def test_degenerate_pair_costs_zero(self):
        scene, grid = _empty(3)
        path = _annotated_path([[1, 1]], scene, grid)
        assert cp.path_cost(path, eta=1.0) == 0.0

    def test_unannotated_path_rejected(self):
        path = cp.Path(points=np.array([[0.0, 0.0], [1.0, 0.0]]),
                       total_time=1.0)
        with pytest.raises(ValueError):
            cp.path_cost(path, eta=1.0)


class TestConfigScore:
    def test_empty_scene_corner_pair_is_manhattan_ratio(self):
        scene, grid = _empty(5)
        cfg = cp.ObjectiveConfig(eta=1.0,
                                 od_pairs=(((0.0, 0.0), (4.0, 4.0)),))
        result = cp.config_score(scene, cfg, "dijkstra", grid)
        assert result.score == pytest.approx(8.0 / (4 * math.sqrt(2)))

    def test_adding_a_camera_never_decreases_score(self):
        rng = np.random.default_rng(21)
        checked = 0
        while checked < 50:
            scene, grid = random_scene(rng, max_n=8, n_cameras=1)
            if not scene.cameras:
                continue
            start = grid.node_xy(0, 0)
            dest = grid.node_xy(grid.nx - 1, grid.ny - 1)
            cfg = cp.ObjectiveConfig(eta=float(rng.uniform(0.1, 4.0)),
                                     od_pairs=((start, dest),))
            bare = cp.config_score(scene.with_cameras(()), cfg, "dijkstra",
                                   grid)
            armed = cp.config_score(scene, cfg, "dijkstra", grid)
            assert armed.score >= bare.score - 1e-12
            checked += 1

    def test_duplicate_camera_leaves_score_unchanged(self):
        scene, grid = _empty(9)
        cam = cp.Camera(x=4, y=4, beta=0.3, alpha=PI)
        cfg = cp.ObjectiveConfig(eta=2.0,
                                 od_pairs=(((0.0, 0.0), (8.0, 8.0)),))
        one = cp.config_score(scene.with_cameras([cam]), cfg, "dijkstra", grid)
        two = cp.config_score(scene.with_cameras([cam, cam]), cfg, "dijkstra",
                              grid)
        assert one.score == two.score

    def test_eta_zero_ignores_cameras(self):
        rng = np.random.default_rng(5)
        scene, grid = _empty(9)
        cfg = cp.ObjectiveConfig(eta=0.0,
                                 od_pairs=(((0.0, 0.0), (8.0, 8.0)),))
        base = cp.config_score(scene, cfg, "dijkstra", grid).score
        for _ in range(10):
            cams = [cp.Camera(x=float(rng.integers(9)),
                              y=float(rng.integers(9)),
                              beta=float(rng.uniform(0, 2 * PI)),
                              alpha=float(rng.uniform(0.3, 2 * PI)))
                    for _ in range(int(rng.integers(1, 4)))]
            assert cp.config_score(scene.with_cameras(cams), cfg, "dijkstra",
                                   grid).score == base

    def test_scaling_invariance_discrete(self):
        # Power-of-two scale factor keeps the float arithmetic exact.
        s = 4.0
        region = cp.Region(0, 8, 0, 8)
        cam = cp.Camera(x=3, y=2, beta=1.0, alpha=PI / 2)
        obs = cp.Obstacle.from_rect(4, 5, 4, 6)
        scene1 = cp.Scene(region=region, obstacles=(obs,), cameras=(cam,))
        scene2 = cp.Scene(
            region=cp.Region(0, 8 * s, 0, 8 * s),
            obstacles=(cp.Obstacle.from_rect(4 * s, 5 * s, 4 * s, 6 * s),),
            cameras=(cp.Camera(x=3 * s, y=2 * s, beta=1.0, alpha=PI / 2),),
        )
        grid1 = cp.GridSpec.from_region(scene1.region, 9, 9)
        grid2 = cp.GridSpec.from_region(scene2.region, 9, 9)
        cfg1 = cp.ObjectiveConfig(eta=1.5,
                                  od_pairs=(((0.0, 0.0), (8.0, 8.0)),))
        cfg2 = cp.ObjectiveConfig(eta=1.5,
                                  od_pairs=(((0.0, 0.0), (8.0 * s, 8.0 * s)),))
        r1 = cp.config_score(scene1, cfg1, "dijkstra", grid1)
        r2 = cp.config_score(scene2, cfg2, "dijkstra", grid2)
        assert r1.score == r2.score

    def test_min_aggregation_bounded_by_mean(self):
        rng = np.random.default_rng(9)
        scene, grid = random_scene(rng, max_n=9, n_cameras=2,
                                   with_obstacles=False)
        pairs = (((0.0, 0.0), (float(grid.nx - 1), float(grid.ny - 1))),
                 ((float(grid.nx - 1), 0.0), (0.0, float(grid.ny - 1))),
                 ((0.0, float(grid.ny - 1)), (float(grid.nx - 1), 0.0)))
        lo = cp.config_score(scene, cp.ObjectiveConfig(
            eta=1.0, od_pairs=pairs, aggregation="min"), "dijkstra", grid)
        hi = cp.config_score(scene, cp.ObjectiveConfig(
            eta=1.0, od_pairs=pairs, aggregation="mean"), "dijkstra", grid)
        assert lo.score <= hi.score + 1e-12

    def test_unreachable_pair_flagged_with_penalty(self):
        region = cp.Region(0, 4, 0, 4)
        wall = cp.Obstacle.from_rect(2, 2, 0, 4)
        scene = cp.Scene(region=region, obstacles=(wall,))
        grid = cp.GridSpec.from_region(region, 5, 5)
        cfg = cp.ObjectiveConfig(eta=1.0,
                                 od_pairs=(((0.0, 0.0), (4.0, 4.0)),))
        result = cp.config_score(scene, cfg, "dijkstra", grid)
        assert not result.per_pair[0].reachable
        assert result.score == cfg.unreachable_penalty

    def test_upwind_mode_scores(self):
        scene, grid = _empty(11)
        scene = scene.with_cameras([cp.Camera(x=5, y=5, beta=0, alpha=PI)])
        cfg = cp.ObjectiveConfig(eta=1.0,
                                 od_pairs=(((0.0, 0.0), (10.0, 10.0)),))
        bare = cp.config_score(scene.with_cameras(()), cfg, "upwind", grid)
        armed = cp.config_score(scene, cfg, "upwind", grid)
        # Calm scene: normalized best response is ~1 (straight at full speed).
        assert bare.score == pytest.approx(1.0, rel=0.05)
        assert armed.score > bare.score

    def test_threaded_scoring_identical(self):
        rng = np.random.default_rng(33)
        scene, grid = random_scene(rng, max_n=9, n_cameras=2)
        pairs = tuple(
            (grid.node_xy(0, iy), grid.node_xy(grid.nx - 1, grid.ny - 1 - iy))
            for iy in range(3)
        )
        cfg = cp.ObjectiveConfig(eta=1.0, od_pairs=pairs)
        seq = cp.config_score(scene, cfg, "dijkstra", grid, max_workers=1)
        par = cp.config_score(scene, cfg, "dijkstra", grid, max_workers=4)
        assert seq.score == par.score
        assert seq.per_pair == par.per_pair

    def test_report_schema(self):
        scene, grid = _empty(5)
        cfg = cp.ObjectiveConfig(eta=0.5,
                                 od_pairs=(((0.0, 0.0), (4.0, 4.0)),))
        report = cp.config_score(scene, cfg, "dijkstra", grid).to_json_dict()
        assert set(report) == {"score", "per_pair", "mode", "eta",
                               "aggregation"}
        assert set(report["per_pair"][0]) == {"start", "dest", "value",
                                              "normalized", "reachable"}

    def test_bad_config_rejected(self):
        with pytest.raises(cp.ConfigurationError):
            cp.ObjectiveConfig(eta=-1.0, od_pairs=(((0, 0), (1, 1)),))
        with pytest.raises(cp.ConfigurationError):
            cp.ObjectiveConfig(eta=1.0, od_pairs=())
        with pytest.raises(cp.ConfigurationError):
            cp.ObjectiveConfig(eta=1.0, od_pairs=(((0, 0), (1, 1)),),
                               aggregation="median")


class TestBoundaryPairs:
    def test_deterministic_and_budgeted(self):
        scene, grid = _empty(7)
        a = cp.boundary_od_pairs(grid, scene, budget=8, seed=0)
        b = cp.boundary_od_pairs(grid, scene, budget=8, seed=0)
        assert a == b
        assert len(a) == 8
        for start, dest in a:
            assert start != dest

    def test_pairs_avoid_obstacles(self):
        region = cp.Region(0, 6, 0, 6)
        scene = cp.Scene(region=region,
                         obstacles=(cp.Obstacle.from_rect(0, 0, 0, 6),))
        grid = cp.GridSpec.from_region(region, 7, 7)
        pairs = cp.boundary_od_pairs(grid, scene, budget=10, seed=1)
        for start, dest in pairs:
            assert start[0] > 0.0 and dest[0] > 0.0
