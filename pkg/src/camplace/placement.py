"""Simulated-annealing search over camera configurations.

The chain proposes a change to one camera per iteration, scores the proposal
by the adversary's best response, and accepts with the Metropolis-style rule
min(1, exp((new - old) / T)) under a linearly decaying temperature. Random
draws come from two named streams spawned from the seed (stream 0 proposals
and initialization, stream 1 acceptance), so results are reproducible
bit-for-bit and insensitive to any internal parallelism.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .grid import GridSpec
from .objective import ObjectiveConfig, config_score
from .scene import Camera, Scene, rasterize_obstacles

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SAConfig:
    """Annealing schedule, chain length, and proposal parameters."""

    t0: float
    iters: int
    seed: int = 0
    n_cameras: int = 1
    proposal: str = "reset"          # "reset", "reset_all", or "perturb"
    sigma_pos: float = 1.0
    sigma_angle: float = 0.5
    camera_alpha: float = math.pi / 2
    falloff_exponent: float = 2.0
    search_alpha: bool = False
    # Optional discrete orientation set; None samples beta uniformly.
    beta_choices: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (self.t0 > 0.0):
            raise ConfigurationError("t0 must be positive")
        if self.iters < 1:
            raise ConfigurationError("iters must be >= 1")
        if self.n_cameras < 1:
            raise ConfigurationError("n_cameras must be >= 1")
        if self.proposal not in ("reset", "reset_all", "perturb"):
            raise ConfigurationError(
                "proposal must be 'reset', 'reset_all', or 'perturb', "
                f"got '{self.proposal}'"
            )

    def temperature(self, k: int) -> float:
        """Linear schedule T(k) = max(0, t0 * (1 - (k+1)/K))."""
        return max(0.0, self.t0 * (1.0 - (k + 1) / self.iters))


@dataclass
class SATrace:
    """Per-iteration records plus the final and best configurations."""

    k: list = field(default_factory=list)
    temperature: list = field(default_factory=list)
    score_proposed: list = field(default_factory=list)
    accepted: list = field(default_factory=list)
    score_best: list = field(default_factory=list)
    final_cameras: tuple[Camera, ...] = ()
    final_score: float = math.nan
    best_cameras: tuple[Camera, ...] = ()
    best_score: float = math.nan

    def record(self, k, t, score_prop, accepted, score_best):
        self.k.append(k)
        self.temperature.append(t)
        self.score_proposed.append(score_prop)
        self.accepted.append(accepted)
        self.score_best.append(score_best)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["k", "T", "score_proposed", "accepted",
                             "score_best"])
            for row in zip(self.k, self.temperature, self.score_proposed,
                           self.accepted, self.score_best):
                writer.writerow([row[0], repr(row[1]), repr(row[2]),
                                 int(row[3]), repr(row[4])])


def accept_probability(score_old: float, score_new: float, t: float) -> float:
    """min(1, exp((new - old)/T)); at T = 0, accept iff new >= old."""
    if t <= 0.0:
        return 1.0 if score_new >= score_old else 0.0
    arg = (score_new - score_old) / t
    if arg >= 0.0:
        return 1.0
    return math.exp(arg)


def _free_nodes(scene: Scene, grid: GridSpec) -> list[tuple[float, float]]:
    mask = rasterize_obstacles(scene.obstacles, grid)
    return [grid.node_xy(ix, iy)
            for iy in range(grid.ny) for ix in range(grid.nx)
            if not mask[iy, ix]]


def random_camera(rng: np.random.Generator, free_nodes, sa: SAConfig) -> Camera:
    """Uniform placement on a free node with a uniform first-ray bearing."""
    pos = free_nodes[int(rng.integers(len(free_nodes)))]
    if sa.beta_choices is not None:
        beta = float(sa.beta_choices[int(rng.integers(len(sa.beta_choices)))])
    else:
        beta = float(rng.uniform(0.0, TWO_PI))
    alpha = sa.camera_alpha
    if sa.search_alpha:
        alpha = float(rng.uniform(0.0, TWO_PI))
        alpha = alpha if alpha > 0.0 else TWO_PI
    return Camera(x=pos[0], y=pos[1], beta=beta, alpha=alpha,
                  falloff_exponent=sa.falloff_exponent)


def propose(cameras, rng: np.random.Generator, scene: Scene, grid: GridSpec,
            sa: SAConfig, free_nodes=None) -> tuple[Camera, ...]:
    """New configuration differing from the input in exactly one camera.

    The ``reset_all`` proposal kind re-randomizes the whole configuration
    instead; it exists for experimentation and is not the default.
    """
    if not cameras:
        raise ConfigurationError("cannot propose from an empty configuration")
    if free_nodes is None:
        free_nodes = _free_nodes(scene, grid)
    if sa.proposal == "reset_all":
        return tuple(random_camera(rng, free_nodes, sa)
                     for _ in range(len(cameras)))
    which = int(rng.integers(len(cameras)))
    new = list(cameras)
    cam = cameras[which]
    if sa.proposal == "reset":
        replacement = random_camera(rng, free_nodes, sa)
        if not sa.search_alpha:
            replacement = Camera(x=replacement.x, y=replacement.y,
                                 beta=replacement.beta, alpha=cam.alpha,
                                 falloff_exponent=cam.falloff_exponent)
        new[which] = replacement
    else:
        mask = rasterize_obstacles(scene.obstacles, grid)
        beta = cam.beta + float(rng.normal(0.0, sa.sigma_angle))
        placed = cam
        for _ in range(100):
            x = cam.x + float(rng.normal(0.0, sa.sigma_pos))
            y = cam.y + float(rng.normal(0.0, sa.sigma_pos))
            if not scene.region.contains(x, y):
                continue
            ix, iy = grid.nearest_node(x, y)
            if mask[iy, ix]:
                continue
            placed = Camera(x=x, y=y, beta=beta, alpha=cam.alpha,
                            falloff_exponent=cam.falloff_exponent)
            break
        else:
            placed = Camera(x=cam.x, y=cam.y, beta=beta, alpha=cam.alpha,
                            falloff_exponent=cam.falloff_exponent)
        new[which] = placed
    return tuple(new)


def simulated_annealing(scene_template: Scene, grid: GridSpec, sa: SAConfig,
                        obj: ObjectiveConfig, mode: str = "dijkstra"
                        ) -> tuple[tuple[Camera, ...], SATrace]:
    """Run one annealing chain; returns the best-ever configuration.

    The trace also carries the last-accepted configuration, which is what a
    plain chain would return; best-ever dominates it at no extra cost.
    """
    ss = np.random.SeedSequence(sa.seed)
    s_prop, s_accept = ss.spawn(2)
    rng_prop = np.random.default_rng(s_prop)
    rng_accept = np.random.default_rng(s_accept)

    free_nodes = _free_nodes(scene_template, grid)
    if not free_nodes:
        raise ConfigurationError("no free nodes available for placement")

    current = tuple(random_camera(rng_prop, free_nodes, sa)
                    for _ in range(sa.n_cameras))
    current_score = config_score(
        scene_template.with_cameras(current), obj, mode, grid).score
    best = current
    best_score = current_score

    trace = SATrace()
    for k in range(sa.iters):
        t = sa.temperature(k)
        candidate = propose(current, rng_prop, scene_template, grid, sa,
                            free_nodes)
        cand_score = config_score(
            scene_template.with_cameras(candidate), obj, mode, grid).score
        p = accept_probability(current_score, cand_score, t)
        accepted = p > rng_accept.random()
        if accepted:
            current = candidate
            current_score = cand_score
        if current_score > best_score:
            best = current
            best_score = current_score
        trace.record(k, t, cand_score, accepted, best_score)

    trace.final_cameras = current
    trace.final_score = current_score
    trace.best_cameras = best
    trace.best_score = best_score
    return best, trace


def anneal_multi(scene_template: Scene, grid: GridSpec, sa: SAConfig,
                 obj: ObjectiveConfig, mode: str = "dijkstra",
                 n_chains: int = 4) -> tuple[tuple[Camera, ...], list[SATrace]]:
    """Run independent chains with spawned seeds and keep the best result."""
    seeds = [int(s.generate_state(1)[0])
             for s in np.random.SeedSequence(sa.seed).spawn(n_chains)]
    traces = []
    best = None
    best_score = -math.inf
    for seed in seeds:
        chain_sa = replace(sa, seed=seed)
        cams, trace = simulated_annealing(scene_template, grid, chain_sa,
                                          obj, mode)
        traces.append(trace)
        if trace.best_score > best_score:
            best = cams
            best_score = trace.best_score
    return best, traces
