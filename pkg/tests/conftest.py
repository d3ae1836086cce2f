import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message=".*TBB.*")

from lpkin.grid import Distribution, VelocityGrid  # noqa: E402


@pytest.fixture
def grid2() -> VelocityGrid:
    return VelocityGrid(dim=2, extent=3.0, n=6)


@pytest.fixture
def grid3() -> VelocityGrid:
    return VelocityGrid(dim=3, extent=3.0, n=6)


def gaussian_on(grid: VelocityGrid, center=None, width: float = 1.0,
                mass: float | None = 1.0) -> Distribution:
    nodes = grid.nodes()
    c = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)[: grid.dim]
    vals = np.exp(-np.sum((nodes - c) ** 2, axis=1) / (2.0 * width**2))
    if mass is not None:
        vals *= mass / (grid.cell_volume * np.sum(vals))
    return Distribution(grid, vals)
