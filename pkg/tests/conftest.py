import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import camplace as cp


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger kernel compilation once so timed tests measure steady state."""
    scene = cp.Scene(region=cp.Region(0, 4, 0, 4),
                     cameras=(cp.Camera(x=2, y=2, beta=0.0, alpha=np.pi),))
    grid = cp.GridSpec.from_region(scene.region, 5, 5)
    cp.scope_mask(scene.cameras[0], grid, scene.obstacles)
    cp.grid_dijkstra(scene, (4.0, 4.0), 1.0, grid)
    wind = cp.build_wind_field(scene, (4.0, 4.0), grid)
    cp.ordered_upwind(scene, wind, (4.0, 4.0))
