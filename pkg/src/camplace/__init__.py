"""camplace: adversarial path planning against camera networks.

Computes the minimum-cost route an evader would take through a 2D region
watched by directional cameras (graph shortest paths or an anisotropic
front-expansion solver), scores camera layouts by that best response, and
searches for near-optimal placements with simulated annealing.
"""

from ._backend import NUMBA_ENABLED
from .errors import (CamplaceError, ConfigurationError, PathExtractionError,
                     SceneValidationError, UnreachableError)
from .grid import GridSpec
from .objective import (ObjectiveConfig, PairScore, ScoreResult,
                        boundary_od_pairs, config_score, path_cost)
from .pathing import (Path, annotate_visibility, extract_path_characteristic,
                      extract_path_discrete, interpolate_value, smooth_path)
from .placement import (SAConfig, SATrace, accept_probability, anneal_multi,
                        propose, simulated_annealing)
from .scene import (Camera, Obstacle, Region, Scene, bearing_from_camera,
                    in_scope, load_scene, rasterize_obstacles, save_scene,
                    scene_from_dict, scene_to_dict, scope_mask,
                    scope_union_mask)
from .solver import (SimplexUpdate, ValueField, anisotropy_ratio,
                     front_speed, grid_dijkstra, obstacle_speed_scaling,
                     one_sided_value, ordered_upwind, simplex_update)
from .windfield import WindField, build_wind_field, dump_wind_csv

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "CamplaceError", "ConfigurationError", "PathExtractionError",
    "SceneValidationError", "UnreachableError",
    "GridSpec",
    "ObjectiveConfig", "PairScore", "ScoreResult", "boundary_od_pairs",
    "config_score", "path_cost",
    "Path", "annotate_visibility", "extract_path_characteristic",
    "extract_path_discrete", "interpolate_value", "smooth_path",
    "SAConfig", "SATrace", "accept_probability", "anneal_multi", "propose",
    "simulated_annealing",
    "Camera", "Obstacle", "Region", "Scene", "bearing_from_camera",
    "in_scope", "load_scene", "rasterize_obstacles", "save_scene",
    "scene_from_dict", "scene_to_dict", "scope_mask", "scope_union_mask",
    "SimplexUpdate", "ValueField", "anisotropy_ratio", "front_speed",
    "grid_dijkstra", "obstacle_speed_scaling", "one_sided_value",
    "ordered_upwind", "simplex_update",
    "WindField", "build_wind_field", "dump_wind_csv",
    "__version__",
]
