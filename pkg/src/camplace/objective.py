"""Configuration scoring: the adversary's best-response cost.

A camera configuration is scored by solving the minimum-cost field for each
origin/destination pair, reading the value at the origin node, normalizing
by the straight-line distance, and aggregating. Higher is better for the
defender: a good layout forces long or heavily watched detours.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SceneValidationError
from .grid import GridSpec
from .pathing import Path
from .scene import Scene, rasterize_obstacles
from .solver import grid_dijkstra, ordered_upwind
from .windfield import build_wind_field

Point = tuple[float, float]


@dataclass(frozen=True)
class ObjectiveConfig:
    """Visibility weight, OD pairs, and how pair scores are aggregated."""

    eta: float
    od_pairs: tuple[tuple[Point, Point], ...]
    aggregation: str = "mean"
    unreachable_penalty: float = 1e6

    def __post_init__(self):
        if self.eta < 0.0:
            raise ConfigurationError("eta must be non-negative")
        pairs = tuple(
            ((float(s[0]), float(s[1])), (float(d[0]), float(d[1])))
            for s, d in self.od_pairs
        )
        object.__setattr__(self, "od_pairs", pairs)
        if not pairs:
            raise ConfigurationError("od_pairs must not be empty")
        if self.aggregation not in ("mean", "min"):
            raise ConfigurationError(
                f"aggregation must be 'mean' or 'min', got '{self.aggregation}'"
            )


@dataclass(frozen=True)
class PairScore:
    start: Point
    dest: Point
    value: float
    normalized: float
    reachable: bool


@dataclass(frozen=True)
class ScoreResult:
    score: float
    per_pair: tuple[PairScore, ...]
    mode: str
    eta: float
    aggregation: str

    def to_json_dict(self) -> dict:
        return {
            "score": self.score,
            "per_pair": [
                {"start": list(p.start), "dest": list(p.dest),
                 "value": p.value, "normalized": p.normalized,
                 "reachable": p.reachable}
                for p in self.per_pair
            ],
            "mode": self.mode,
            "eta": self.eta,
            "aggregation": self.aggregation,
        }


def path_cost(path: Path, eta: float) -> float:
    """Visibility-weighted arc length over the straight start-end distance.

    Each segment contributes length * (1 + eta) when its midpoint is seen by
    some camera and plain length otherwise; the path must be annotated first.
    """
    if len(path.points) < 2:
        return 0.0
    if path.seg_in_scope is None:
        raise ValueError("path must be visibility-annotated before costing")
    start = path.points[0]
    end = path.points[-1]
    straight = math.hypot(end[0] - start[0], end[1] - start[1])
    if straight == 0.0:
        return 0.0
    lengths = path.segment_lengths()
    weighted = lengths * (1.0 + eta * path.seg_in_scope.astype(float))
    return float(weighted.sum() / straight)


def _pair_value(scene: Scene, grid: GridSpec, start: Point, dest: Point,
                eta: float, mode: str, penalty: float) -> PairScore:
    straight = math.hypot(dest[0] - start[0], dest[1] - start[1])
    if straight == 0.0:
        return PairScore(start, dest, 0.0, 0.0, True)
    if mode == "dijkstra":
        vf = grid_dijkstra(scene, dest, eta, grid)
        value = vf.value_at(start)
        norm = straight
    elif mode == "upwind":
        wind = build_wind_field(scene, dest, grid)
        vf = ordered_upwind(scene, wind, dest)
        value = vf.value_at(start)
        norm = straight / scene.base_speed
    else:
        raise ConfigurationError(f"unknown solver mode '{mode}'")
    if not math.isfinite(value):
        return PairScore(start, dest, math.inf, penalty, False)
    return PairScore(start, dest, float(value), float(value / norm), True)


def config_score(scene: Scene, config: ObjectiveConfig, mode: str,
                 grid: GridSpec, max_workers: int = 1) -> ScoreResult:
    """Score a configuration over all OD pairs.

    Pair evaluations are independent and may fan out over threads; the
    reduction sums normalized values in sorted order so the result is
    identical regardless of evaluation order.
    """
    def run(pair):
        return _pair_value(scene, grid, pair[0], pair[1],
                           config.eta, mode, config.unreachable_penalty)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            per_pair = tuple(pool.map(run, config.od_pairs))
    else:
        per_pair = tuple(run(p) for p in config.od_pairs)

    normalized = sorted(p.normalized for p in per_pair)
    if config.aggregation == "min":
        score = float(normalized[0])
    else:
        score = float(math.fsum(normalized) / len(normalized))
    return ScoreResult(score=score, per_pair=per_pair, mode=mode,
                       eta=config.eta, aggregation=config.aggregation)


def boundary_od_pairs(grid: GridSpec, scene: Scene, budget: int = 8,
                      seed: int = 0) -> tuple[tuple[Point, Point], ...]:
    """Deterministic sample of ordered boundary-node pairs.

    All ordered pairs of distinct non-obstacle perimeter nodes, subsampled
    to ``budget`` with a fixed seed so repeated runs agree.
    """
    mask = rasterize_obstacles(scene.obstacles, grid)
    nodes = []
    for ix in range(grid.nx):
        for iy in (0, grid.ny - 1):
            if not mask[iy, ix]:
                nodes.append(grid.node_xy(ix, iy))
    for iy in range(1, grid.ny - 1):
        for ix in (0, grid.nx - 1):
            if not mask[iy, ix]:
                nodes.append(grid.node_xy(ix, iy))
    if len(nodes) < 2:
        raise SceneValidationError("not enough free boundary nodes for OD pairs")
    pairs = [(a, b) for a in nodes for b in nodes if a != b]
    rng = np.random.default_rng(seed)
    if budget < len(pairs):
        idx = rng.choice(len(pairs), size=budget, replace=False)
        pairs = [pairs[i] for i in sorted(idx)]
    return tuple(pairs)
