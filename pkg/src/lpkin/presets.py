"""Initial-condition presets."""

from __future__ import annotations

import numpy as np

from .errors import UsageError
from .grid import Distribution, VelocityGrid, load_distribution

__all__ = ["maxwellian_ic", "two_gaussian_ic", "build_initial"]

TWO_GAUSSIAN_CENTERS = np.array([[2.0, 0.0, 0.0], [0.0, -2.0, 0.0]])


def maxwellian_ic(grid: VelocityGrid, mass: float = 1.0, temperature: float = 1.0) -> Distribution:
    nodes = grid.nodes()
    d2 = np.sum(nodes**2, axis=1)
    vals = mass / (2.0 * np.pi * temperature) ** (grid.dim / 2.0) * np.exp(
        -d2 / (2.0 * temperature)
    )
    return Distribution(grid, vals)


def two_gaussian_ic(grid: VelocityGrid) -> Distribution:
    """Two unit-width Gaussian humps centered at (2,0,0) and (0,-2,0)."""
    nodes = grid.nodes()
    vals = np.zeros(grid.size)
    for c in TWO_GAUSSIAN_CENTERS:
        d2 = np.sum((nodes - c[: grid.dim]) ** 2, axis=1)
        vals += np.exp(-d2 / 2.0)
    return Distribution(grid, vals)


def build_initial(name: str, grid: VelocityGrid, ic_mass: float | None = None) -> Distribution:
    """Construct a named preset, optionally rescaled to a target mass."""
    if name == "maxwellian":
        f = maxwellian_ic(grid)
    elif name == "two_gaussian":
        f = two_gaussian_ic(grid)
    elif name.startswith("file:"):
        f = load_distribution(name[5:], centering=grid.centering)
        if not f.grid.same_as(grid):
            raise UsageError(
                f"snapshot grid (dim={f.grid.dim}, n={f.grid.n}, L={f.grid.extent}) "
                "does not match the configured grid"
            )
    else:
        raise UsageError(f"unknown initial condition {name!r}")
    if ic_mass is not None:
        mass = grid.cell_volume * float(np.sum(f.values))
        if mass == 0.0:
            raise UsageError("cannot rescale a zero-mass initial condition")
        f = Distribution(grid, f.values * (ic_mass / mass))
    return f
