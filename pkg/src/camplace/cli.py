"""Command-line interface.

Subcommands: ``plan`` (solve and extract one adversarial path), ``place``
(anneal a camera layout), ``score`` (evaluate an existing layout), and
``render`` (redraw an overlay from saved outputs). Every output set carries
a ``manifest.json`` recording the resolved arguments; re-running via
``camplace --from-manifest manifest.json --out DIR`` reproduces the outputs
byte-for-byte.

Exit codes: 0 ok, 2 validation failure, 3 unreachable destination,
4 path-extraction non-convergence.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from .errors import (CamplaceError, ConfigurationError, PathExtractionError,
                     SceneValidationError, UnreachableError)
from .grid import GridSpec
from .objective import ObjectiveConfig, boundary_od_pairs, config_score
from .pathing import (Path, annotate_visibility, extract_path_characteristic,
                      extract_path_discrete, smooth_path, write_path_json)
from .placement import SAConfig, simulated_annealing
from .render import (read_value_csv, write_overlay_svg, write_value_csv,
                     write_value_pgm)
from .scene import Scene, load_scene, save_scene, write_json_atomic
from .solver import ValueField, grid_dijkstra, ordered_upwind
from .windfield import build_wind_field

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_UNREACHABLE = 3
EXIT_NONCONVERGENCE = 4


@dataclass
class RunManifest:
    """Record of one CLI run, written atomically next to its outputs."""

    subcommand: str
    scene: str
    out_dir: str
    mode: str | None
    grid: str | None
    eta: float | None
    start: str | None
    dest: str | None
    od_pairs: str | None
    sa: dict | None
    seed: int | None
    duration_seconds: float
    argv: list

    def write(self, path) -> None:
        write_json_atomic(asdict(self), path)


def _parse_point(text: str) -> tuple[float, float]:
    try:
        sx, sy = text.split(",")
        return float(sx), float(sy)
    except ValueError:
        raise SceneValidationError(
            f"expected a point 'X,Y', got '{text}'"
        )


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        sx, sy = text.lower().split("x")
        nx, ny = int(sx), int(sy)
    except ValueError:
        raise SceneValidationError(f"expected a grid 'NXxNY', got '{text}'")
    return nx, ny


def _load_od_pairs(spec: str, grid: GridSpec, scene: Scene):
    if spec.startswith("auto:"):
        budget = int(spec.split(":", 1)[1])
        return boundary_od_pairs(grid, scene, budget=budget)
    with open(spec, "r", encoding="utf-8") as f:
        raw = json.load(f)
    pairs = []
    for item in raw:
        (x0, y0), (x1, y1) = item
        pairs.append(((float(x0), float(y0)), (float(x1), float(y1))))
    return tuple(pairs)


def _out_dir(args) -> pathlib.Path:
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _solve(scene: Scene, grid: GridSpec, dest, mode: str, eta: float
           ) -> tuple[ValueField, object]:
    if mode == "dijkstra":
        return grid_dijkstra(scene, dest, eta, grid), None
    wind = build_wind_field(scene, dest, grid)
    return ordered_upwind(scene, wind, dest), wind


def cmd_plan(args, argv) -> int:
    started = time.perf_counter()
    scene = load_scene(args.scene)
    nx, ny = _parse_grid(args.grid)
    grid = GridSpec.from_region(scene.region, nx, ny)
    start = _parse_point(args.start)
    dest = _parse_point(args.dest)
    out = _out_dir(args)

    field, wind = _solve(scene, grid, dest, args.mode, args.eta)
    if not field.is_reachable(start):
        raise UnreachableError("start cannot reach the destination")
    if args.mode == "dijkstra":
        track = extract_path_discrete(field, start)
    else:
        track = extract_path_characteristic(field, wind, start,
                                            step=grid.h * args.step_fraction)
    if args.smooth:
        track = smooth_path(track, scene, grid)
    annotate_visibility(track, scene, grid)

    write_value_pgm(field, out / "u.pgm")
    write_value_csv(field, out / "u.csv")
    write_path_json(track, out / "path.json")
    write_overlay_svg(out / "overlay.svg", scene, grid, field, track)

    manifest = RunManifest(
        subcommand="plan", scene=str(args.scene), out_dir=str(out),
        mode=args.mode, grid=args.grid, eta=args.eta, start=args.start,
        dest=args.dest, od_pairs=None, sa=None, seed=None,
        duration_seconds=time.perf_counter() - started, argv=argv,
    )
    manifest.write(out / "manifest.json")
    print(f"plan: cost={track.total_time!r} "
          f"visible_fraction={track.visible_fraction!r} -> {out}")
    return EXIT_OK


def cmd_place(args, argv) -> int:
    started = time.perf_counter()
    scene = load_scene(args.scene)
    nx, ny = _parse_grid(args.grid)
    grid = GridSpec.from_region(scene.region, nx, ny)
    out = _out_dir(args)
    pairs = _load_od_pairs(args.od_pairs, grid, scene)
    obj = ObjectiveConfig(eta=args.eta, od_pairs=pairs)
    if args.cameras == 0:
        placed = scene.with_cameras(())
        score = config_score(placed, obj, args.mode, grid).score
        save_scene(placed, out / "scene_placed.json")
        (out / "trace.csv").write_text("k,T,score_proposed,accepted,score_best\n",
                                       encoding="utf-8")
        write_overlay_svg(out / "overlay.svg", placed, grid)
        manifest = RunManifest(
            subcommand="place", scene=str(args.scene), out_dir=str(out),
            mode=args.mode, grid=args.grid, eta=args.eta, start=None,
            dest=None, od_pairs=args.od_pairs,
            sa={"t0": args.t0, "iters": args.iters, "n_cameras": 0,
                "proposal": args.proposal, "alpha": args.alpha},
            seed=args.seed, duration_seconds=time.perf_counter() - started,
            argv=argv,
        )
        manifest.write(out / "manifest.json")
        print(f"place: score={score!r} (no cameras) -> {out}")
        return EXIT_OK

    sa = SAConfig(
        t0=args.t0, iters=args.iters, seed=args.seed,
        n_cameras=args.cameras,
        proposal="reset" if args.proposal == "reset" else "perturb",
        camera_alpha=args.alpha,
    )
    best, trace = simulated_annealing(scene, grid, sa, obj, mode=args.mode)
    placed = scene.with_cameras(best)
    save_scene(placed, out / "scene_placed.json")
    trace.write_csv(out / "trace.csv")

    field, wind = _solve(placed, grid, pairs[0][1], args.mode, args.eta)
    track = None
    if field.is_reachable(pairs[0][0]):
        if args.mode == "dijkstra":
            track = extract_path_discrete(field, pairs[0][0])
        else:
            track = extract_path_characteristic(field, wind, pairs[0][0],
                                                step=grid.h * 0.5)
        annotate_visibility(track, placed, grid)
    write_overlay_svg(out / "overlay.svg", placed, grid, field, track)

    manifest = RunManifest(
        subcommand="place", scene=str(args.scene), out_dir=str(out),
        mode=args.mode, grid=args.grid, eta=args.eta, start=None, dest=None,
        od_pairs=args.od_pairs,
        sa={"t0": args.t0, "iters": args.iters, "n_cameras": args.cameras,
            "proposal": args.proposal, "alpha": args.alpha},
        seed=args.seed, duration_seconds=time.perf_counter() - started,
        argv=argv,
    )
    manifest.write(out / "manifest.json")
    print(f"place: best_score={trace.best_score!r} -> {out}")
    return EXIT_OK


def cmd_score(args, argv) -> int:
    started = time.perf_counter()
    scene = load_scene(args.scene)
    nx, ny = _parse_grid(args.grid)
    grid = GridSpec.from_region(scene.region, nx, ny)
    pairs = _load_od_pairs(args.od_pairs, grid, scene)
    obj = ObjectiveConfig(eta=args.eta, od_pairs=pairs,
                          aggregation=args.aggregation)
    result = config_score(scene, obj, args.mode, grid)
    report = result.to_json_dict()
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if args.out:
        out = _out_dir(args)
        write_json_atomic(report, out / "score.json")
        manifest = RunManifest(
            subcommand="score", scene=str(args.scene), out_dir=str(out),
            mode=args.mode, grid=args.grid, eta=args.eta, start=None,
            dest=None, od_pairs=args.od_pairs, sa=None, seed=None,
            duration_seconds=time.perf_counter() - started, argv=argv,
        )
        manifest.write(out / "manifest.json")
    return EXIT_OK


def cmd_render(args, argv) -> int:
    started = time.perf_counter()
    scene = load_scene(args.scene)
    nx, ny = _parse_grid(args.grid)
    grid = GridSpec.from_region(scene.region, nx, ny)
    out = _out_dir(args)

    field = None
    if args.field:
        u = read_value_csv(args.field)
        if u.shape != (grid.ny, grid.nx):
            raise SceneValidationError(
                f"field dump shape {u.shape} does not match grid {args.grid}"
            )
        field = ValueField(
            grid=grid, u=u,
            state=np.where(np.isfinite(u), 2, 0).astype(np.uint8),
            pred=np.full((grid.ny, grid.nx), -1, np.int64),
            pred2=np.full((grid.ny, grid.nx), -1, np.int64),
            accept_log=np.zeros(0), destination=(0.0, 0.0), mode="render",
            base_speed=scene.base_speed,
        )
    track = None
    if args.path:
        with open(args.path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        pts = np.array([[p["x"], p["y"]] for p in raw])
        flags = np.array([bool(p["in_scope"]) for p in raw][:-1], dtype=bool)
        track = Path(points=pts, total_time=float("nan"),
                     seg_in_scope=flags if len(pts) > 1 else None)

    write_overlay_svg(out / "overlay.svg", scene, grid, field, track)
    manifest = RunManifest(
        subcommand="render", scene=str(args.scene), out_dir=str(out),
        mode=None, grid=args.grid, eta=None, start=None, dest=None,
        od_pairs=None, sa=None, seed=None,
        duration_seconds=time.perf_counter() - started, argv=argv,
    )
    manifest.write(out / "manifest.json")
    print(f"render -> {out / 'overlay.svg'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camplace",
        description="Adversarial path planning and camera placement",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--scene", required=True, help="scene JSON file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--grid", default="20x20", help="NXxNY node grid")
        p.add_argument("--mode", choices=("dijkstra", "upwind"),
                       default="dijkstra")
        p.add_argument("--eta", type=float, default=1.0,
                       help="visibility weight")

    p_plan = sub.add_parser("plan", help="solve and extract one path")
    common(p_plan)
    p_plan.add_argument("--start", required=True, help="start point X,Y")
    p_plan.add_argument("--dest", required=True, help="destination point X,Y")
    p_plan.add_argument("--step-fraction", type=float, default=0.5,
                        help="descent step as a fraction of h (upwind mode)")
    p_plan.add_argument("--smooth", action="store_true",
                        help="straighten path sub-chains where safe")

    p_place = sub.add_parser("place", help="anneal a camera layout")
    common(p_place)
    p_place.add_argument("--cameras", type=int, required=True)
    p_place.add_argument("--t0", type=float, default=1.0)
    p_place.add_argument("--iters", type=int, default=500)
    p_place.add_argument("--seed", type=int, default=0)
    p_place.add_argument("--od-pairs", default="auto:8",
                         help="JSON file of [[x0,y0],[x1,y1]] pairs or auto:M")
    p_place.add_argument("--proposal", choices=("reset", "perturb"),
                         default="reset")
    p_place.add_argument("--alpha", type=float, default=np.pi / 2,
                         help="camera opening angle used during search")

    p_score = sub.add_parser("score", help="evaluate a camera layout")
    common(p_score)
    p_score.add_argument("--od-pairs", default="auto:8")
    p_score.add_argument("--aggregation", choices=("mean", "min"),
                         default="mean")

    p_render = sub.add_parser("render", help="redraw an overlay")
    p_render.add_argument("--scene", required=True)
    p_render.add_argument("--out", required=True)
    p_render.add_argument("--grid", default="20x20")
    p_render.add_argument("--path", help="path.json from a plan run")
    p_render.add_argument("--field", help="u.csv from a plan run")

    return parser


def _expand_manifest(argv: list) -> list:
    """Replace '--from-manifest FILE [--out DIR]' by the recorded argv."""
    if not argv or argv[0] != "--from-manifest":
        return argv
    if len(argv) < 2:
        raise SceneValidationError("--from-manifest needs a manifest file")
    with open(argv[1], "r", encoding="utf-8") as f:
        manifest = json.load(f)
    stored = list(manifest["argv"])
    rest = argv[2:]
    if rest[:1] == ["--out"] and len(rest) >= 2:
        if "--out" in stored:
            i = stored.index("--out")
            stored[i + 1] = rest[1]
        else:
            stored.extend(["--out", rest[1]])
        rest = rest[2:]
    return stored + rest


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_manifest(argv)
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.subcommand in ("plan", "place") and not args.out:
            parser.error(f"{args.subcommand} requires --out")
        handler = {"plan": cmd_plan, "place": cmd_place,
                   "score": cmd_score, "render": cmd_render}[args.subcommand]
        return handler(args, argv)
    except UnreachableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except PathExtractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (SceneValidationError, ConfigurationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CamplaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
