"""Velocity-space grids, gridded distributions and macroscopic functionals.

The velocity domain is the cube [-L, L)^dim discretized with n uniform
cells per axis (spacing h = 2L/n).  Two node placements are supported:

* ``cell`` (default): nodes at -L + (k + 1/2) h, so the node set is an
  exact fixed point of v -> -v.  The collision engine relies on this
  mirror symmetry for its discrete conservation properties.
* ``node``: nodes at -L + k h; the node at -L has no mirror at +L.

All integrals are midpoint sums, h^dim * sum of node values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UsageError

__all__ = [
    "VelocityGrid",
    "Distribution",
    "Moments",
    "CollisionModel",
    "moments",
    "maxwellian",
    "l1_distance",
    "save_distribution",
    "load_distribution",
]


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform Cartesian grid on [-L, L)^dim."""

    dim: int
    extent: float
    n: int
    centering: str = "cell"

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise UsageError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 2:
            raise UsageError(f"need at least 2 points per axis, got {self.n}")
        if not self.extent > 0.0:
            raise UsageError(f"extent must be positive, got {self.extent}")
        if self.centering not in ("cell", "node"):
            raise UsageError(f"unknown centering {self.centering!r}")

    @property
    def h(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis."""
        k = np.arange(self.n, dtype=np.float64)
        if self.centering == "cell":
            return -self.extent + (k + 0.5) * self.h
        return -self.extent + k * self.h

    def nodes(self) -> np.ndarray:
        """All node coordinates, shape (n^dim, dim), row-major index order."""
        ax = self.axis()
        grids = np.meshgrid(*([ax] * self.dim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def same_as(self, other: "VelocityGrid") -> bool:
        return (
            self.dim == other.dim
            and self.n == other.n
            and self.extent == other.extent
            and self.centering == other.centering
        )


@dataclass(frozen=True)
class Distribution:
    """Node values of a density f(v); signed values are permitted."""

    grid: VelocityGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.size,):
            raise UsageError(
                f"values must have length {self.grid.size}, got shape {vals.shape}"
            )
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))


@dataclass(frozen=True)
class Moments:
    """Mass, momentum, kinetic energy and (optionally defined) entropy."""

    mass: float
    momentum: tuple[float, ...]
    energy: float
    entropy: float | None = None

    @property
    def entropy_defined(self) -> bool:
        return self.entropy is not None


@dataclass(frozen=True)
class CollisionModel:
    """Collision kind, kernel exponent gamma and Knudsen number."""

    kind: str  # "boltzmann_vhs" | "landau"
    gamma: float
    epsilon: float = 1.0

    def __post_init__(self):
        if self.kind not in ("boltzmann_vhs", "landau"):
            raise UsageError(f"unknown collision kind {self.kind!r}")
        if not self.epsilon > 0.0:
            raise UsageError(f"epsilon must be positive, got {self.epsilon}")
        if not (-3.0 <= self.gamma <= 2.0):
            raise UsageError(f"gamma={self.gamma} outside the validated range [-3, 2]")


def moments(f: Distribution) -> Moments:
    """Midpoint-quadrature mass, momentum, energy, and entropy of f.

    Entropy (integral of f log f) is only defined when every node value is
    strictly positive; otherwise it is flagged as undefined, not an error.
    """
    g = f.grid
    w = g.cell_volume
    vals = f.values
    nodes = g.nodes()
    mass = w * float(np.sum(vals))
    mom = tuple(w * float(np.sum(vals * nodes[:, d])) for d in range(g.dim))
    energy = w * float(np.sum(vals * np.sum(nodes**2, axis=1)))
    if vals.size and np.all(vals > 0.0):
        entropy = w * float(np.sum(vals * np.log(vals)))
    else:
        entropy = None
    return Moments(mass=mass, momentum=mom, energy=energy, entropy=entropy)


def maxwellian(m: Moments, grid: VelocityGrid) -> Distribution:
    """Gaussian with exactly the mass, bulk velocity and temperature of m."""
    if not m.mass > 0.0:
        raise DomainError(f"maxwellian needs positive mass, got {m.mass}")
    if not m.energy > 0.0:
        raise DomainError(f"maxwellian needs positive energy, got {m.energy}")
    u = np.array(m.momentum, dtype=np.float64) / m.mass
    temp = (m.energy / m.mass - float(np.dot(u, u))) / grid.dim
    if not temp > 0.0:
        raise DomainError(f"non-positive temperature {temp}")
    nodes = grid.nodes()
    d2 = np.sum((nodes - u) ** 2, axis=1)
    vals = m.mass / (2.0 * math.pi * temp) ** (grid.dim / 2.0) * np.exp(-d2 / (2.0 * temp))
    return Distribution(grid, vals)


def l1_distance(f: Distribution, g: Distribution) -> float:
    """h^dim * sum |f - g| on a shared grid."""
    if not f.grid.same_as(g.grid):
        raise UsageError("l1_distance requires both distributions on the same grid")
    return f.grid.cell_volume * float(np.sum(np.abs(f.values - g.values)))


def save_distribution(f: Distribution, path) -> None:
    """Snapshot format: header ``dim n L`` then one node value per line."""
    g = f.grid
    with open(path, "w") as fh:
        fh.write(f"{g.dim} {g.n} {g.extent:.17g}\n")
        for v in f.values:
            fh.write(f"{v:.17g}\n")


def load_distribution(path, centering: str = "cell") -> Distribution:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise UsageError(f"bad snapshot header in {path}")
        dim, n, L = int(header[0]), int(header[1]), float(header[2])
        vals = np.array([float(line) for line in fh if line.strip()], dtype=np.float64)
    grid = VelocityGrid(dim=dim, extent=L, n=n, centering=centering)
    if vals.size != grid.size:
        raise UsageError(
            f"snapshot {path} has {vals.size} values, expected {grid.size}"
        )
    return Distribution(grid, vals)
