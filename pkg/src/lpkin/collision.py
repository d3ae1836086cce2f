"""Collision-operator discretizations built on the pair-scatter engine.

The shared primitive is a weighted pair convolution: for every unordered
pair of grid nodes and every retained scattering direction, the product
f(v) f(w) is deposited at the two post-collision points and the same
amount is removed from v and w.  Per-scheme physics enters only through
the direction weights, which depend on the pair separation rho through
the integer squared index distance of the pair (exact, no rounding).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _engine
from .errors import TableRangeError, UsageError
from .grid import CollisionModel, Distribution, VelocityGrid
from .kernels import KernelTable, vhs_relax_weight
from .quadrature import SphereQuadrature, sphere_measure

__all__ = [
    "PairCoordinates",
    "pair_coordinates",
    "post_collision",
    "q_vhs",
    "lp_gain_apply",
    "HalfSet",
    "half_directions",
    "vhs_direction_weights",
    "landau_direction_weights",
    "pair_convolve",
    "PROD_CUTOFF_DEFAULT",
]

# pairs with |f(v) f(w)| below this fraction of max|f|^2 are skipped;
# skipping is conservation-neutral because gain and loss drop together
PROD_CUTOFF_DEFAULT = 1e-14


@dataclass(frozen=True)
class PairCoordinates:
    """Sum/difference coordinates of a velocity pair."""

    z: np.ndarray
    u: np.ndarray
    rho: float
    sigma: np.ndarray | None  # undefined (None) when rho == 0

    @property
    def sigma_defined(self) -> bool:
        return self.sigma is not None


def pair_coordinates(v: np.ndarray, w: np.ndarray) -> PairCoordinates:
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    u = v - w
    rho = float(np.linalg.norm(u))
    sigma = u / rho if rho > 0.0 else None
    return PairCoordinates(z=v + w, u=u, rho=rho, sigma=sigma)


def post_collision(v: np.ndarray, w: np.ndarray, zeta: np.ndarray):
    """Post-collision pair: (v + w +/- |v - w| zeta) / 2."""
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    zeta = np.asarray(zeta, dtype=np.float64)
    z = v + w
    rho = float(np.linalg.norm(v - w))
    vp = 0.5 * (z + rho * zeta)
    wp = 0.5 * (z - rho * zeta)
    return vp, wp


@dataclass(frozen=True)
class HalfSet:
    """One node per antipodal direction pair of a quadrature rule."""

    c1: np.ndarray  # component along the pair axis
    c2: np.ndarray  # transverse components
    c3: np.ndarray | None
    weights: np.ndarray
    index: np.ndarray  # node index in the full rule
    antipode: np.ndarray  # index of the antipodal node


def half_directions(rule: SphereQuadrature) -> HalfSet:
    """Split an antipodally closed rule into direction pairs."""
    m = rule.count
    if m % 2 != 0:
        raise UsageError("collision quadrature must have an even node count")
    anti = np.empty(m, dtype=np.int64)
    for j in range(m):
        d = np.sum(np.abs(rule.nodes + rule.nodes[j]), axis=1)
        k = int(np.argmin(d))
        if d[k] > 1e-12:
            raise UsageError("collision quadrature must be antipodally closed")
        anti[j] = k
    half = np.array([j for j in range(m) if j < anti[j]], dtype=np.int64)
    if 2 * half.size != m:
        raise UsageError("could not pair quadrature nodes antipodally")
    nodes = rule.nodes[half]
    if rule.dim == 3:
        return HalfSet(
            c1=np.ascontiguousarray(nodes[:, 2]),
            c2=np.ascontiguousarray(nodes[:, 0]),
            c3=np.ascontiguousarray(nodes[:, 1]),
            weights=np.ascontiguousarray(rule.weights[half]),
            index=half,
            antipode=anti[half],
        )
    return HalfSet(
        c1=np.ascontiguousarray(nodes[:, 0]),
        c2=np.ascontiguousarray(nodes[:, 1]),
        c3=None,
        weights=np.ascontiguousarray(rule.weights[half]),
        index=half,
        antipode=anti[half],
    )


def _k2_range(grid: VelocityGrid) -> int:
    return grid.dim * (grid.n - 1) ** 2


def vhs_direction_weights(grid: VelocityGrid, hs: HalfSet, frac_of_rho) -> np.ndarray:
    """ww[k2, j] = w_j * 2 * frac(rho(k2)) / |S^{d-1}| for the VHS family.

    ``frac_of_rho`` maps the pair separation to the transition fraction of
    the scheme (e.g. rho^gamma * dt/eps for forward Euler, 1 - exp(-...)
    for the exact relaxation).
    """
    k2max = _k2_range(grid)
    smeas = sphere_measure(grid.dim)
    k2 = np.arange(k2max + 1)
    rho = grid.h * np.sqrt(k2.astype(np.float64))
    frac = np.array([frac_of_rho(r) if i > 0 else 0.0 for i, r in enumerate(rho)])
    return np.ascontiguousarray(np.outer(2.0 * frac / smeas, hs.weights))


def _nearest_levels(rho: np.ndarray, levels: np.ndarray) -> np.ndarray:
    """Nearest table level in log-rho for each separation (geometric grids)."""
    logl = np.log(levels)
    pos = np.searchsorted(logl, np.log(np.maximum(rho, levels[0] * 1e-12)))
    pos = np.clip(pos, 1, levels.size - 1)
    lo = pos - 1
    pick_hi = np.abs(logl[pos] - np.log(rho)) < np.abs(np.log(rho) - logl[lo])
    return np.where(pick_hi, pos, lo).astype(np.int64)


def landau_direction_weights(grid: VelocityGrid, hs: HalfSet, table: KernelTable) -> np.ndarray:
    """ww[k2, j] from a tabulated spherical heat kernel (nearest rho level).

    Table rows must sit on the rule's own polar nodes so that the loss
    implicit in the unit row mass is reproduced exactly by the engine.
    """
    spec = table.spec
    if spec.kind == "vhs_relax":
        raise UsageError("landau_direction_weights needs a Landau kernel table")
    if spec.dim != grid.dim:
        raise UsageError(f"kernel table dim {spec.dim} does not match grid dim {grid.dim}")
    k2max = _k2_range(grid)
    k2 = np.arange(1, k2max + 1)
    rho = grid.h * np.sqrt(k2.astype(np.float64))
    levels = table.rho_levels
    gap = levels[-1] / levels[-2] if levels.size > 1 else 1.0
    if rho[-1] > levels[-1] * math.sqrt(gap) or rho[0] < levels[0] / math.sqrt(gap):
        raise TableRangeError(
            f"pair separations [{rho[0]:.4g}, {rho[-1]:.4g}] exceed table "
            f"range [{levels[0]:.4g}, {levels[-1]:.4g}]"
        )
    lvl = _nearest_levels(rho, levels)

    if grid.dim == 3:
        mus = table.angle_nodes
        n_theta = mus.size
        # locate each half-direction's polar cosine among the table nodes
        ith = np.array([int(np.argmin(np.abs(mus - c))) for c in hs.c1], dtype=np.int64)
        if np.max(np.abs(mus[ith] - hs.c1)) > 1e-10:
            raise UsageError("kernel table angle nodes do not match the quadrature rule")
        sym = table.values[:, ith] + table.values[:, n_theta - 1 - ith]
    else:
        angles = table.angle_nodes
        phis = np.arctan2(hs.c2, hs.c1)
        ith = np.array([int(np.argmin(np.abs(angles - p))) for p in phis], dtype=np.int64)
        if np.max(np.abs(angles[ith] - phis)) > 1e-10:
            raise UsageError("kernel table angle nodes do not match the quadrature rule")
        # antipodal partner carries the (angle + pi) kernel value
        phis_anti = np.arctan2(-hs.c2, -hs.c1)
        ith2 = np.array([int(np.argmin(np.abs(angles - p))) for p in phis_anti], dtype=np.int64)
        sym = table.values[:, ith] + table.values[:, ith2]

    ww = np.zeros((k2max + 1, hs.weights.size))
    ww[1:] = sym[lvl] * hs.weights[None, :]
    return np.ascontiguousarray(ww)


def pair_convolve(
    f: Distribution,
    hs: HalfSet,
    ww: np.ndarray,
    mode: int = _engine.MODE_STEP,
    prod_cutoff: float = PROD_CUTOFF_DEFAULT,
) -> np.ndarray:
    """Run the scatter engine; returns the raw node update array."""
    grid = f.grid
    vals = f.values
    fmax = float(np.max(np.abs(vals))) if vals.size else 0.0
    if fmax == 0.0:
        return np.zeros(grid.size)
    cut_abs = prod_cutoff * fmax * fmax
    node_cut = cut_abs / fmax
    active = np.nonzero(np.abs(vals) > node_cut)[0].astype(np.int64)
    if active.size == 0:
        return np.zeros(grid.size)
    if grid.dim == 3:
        return _engine.pair_scatter_3d(
            vals, grid.n, grid.cell_volume, active, ww, hs.c1, hs.c2, hs.c3, cut_abs, mode
        )
    return _engine.pair_scatter_2d(
        vals, grid.n, grid.cell_volume, active, ww, hs.c1, hs.c2, cut_abs, mode
    )


def q_vhs(
    f: Distribution,
    model: CollisionModel,
    zq: SphereQuadrature,
    prod_cutoff: float = PROD_CUTOFF_DEFAULT,
) -> Distribution:
    """VHS Boltzmann collision operator q(f)/eps in conservative form."""
    if model.kind != "boltzmann_vhs":
        raise UsageError(f"q_vhs needs a boltzmann_vhs model, got {model.kind!r}")
    if zq.dim != f.grid.dim:
        raise UsageError("quadrature dimension does not match the grid")
    hs = half_directions(zq)
    gamma = model.gamma
    ww = vhs_direction_weights(f.grid, hs, lambda rho: rho**gamma)
    out = pair_convolve(f, hs, ww, mode=_engine.MODE_STEP, prod_cutoff=prod_cutoff)
    return Distribution(f.grid, out / model.epsilon)


def lp_gain_apply(
    f: Distribution,
    table: KernelTable,
    zq: SphereQuadrature,
    model: CollisionModel,
    prod_cutoff: float = PROD_CUTOFF_DEFAULT,
) -> Distribution:
    """Pure gain of one lifted step: kernel-weighted pair deposits.

    The diagonal (v = w) pairs act as the identity and contribute
    h^dim f^2 times the kernel row mass at rho = 0.  Total mass equals
    mass(f)^2 when the kernel rows have unit mass and no deposit leaves
    the grid.
    """
    grid = f.grid
    if zq.dim != grid.dim:
        raise UsageError("quadrature dimension does not match the grid")
    spec = table.spec
    hs = half_directions(zq)
    if spec.kind == "vhs_relax":
        if model.kind != "boltzmann_vhs":
            raise UsageError("vhs_relax table requires a boltzmann_vhs model")
        levels = table.rho_levels
        smeas = sphere_measure(grid.dim)
        wvals = table.values[:, 0] * smeas  # rows are constant in angle
        k2max = _k2_range(grid)
        rho = grid.h * np.sqrt(np.arange(k2max + 1, dtype=np.float64))
        lvl = _nearest_levels(np.maximum(rho, levels[0]), levels)
        frac = wvals[lvl]
        ww = np.outer(2.0 * frac / smeas, hs.weights)
        ww[0] = 0.0
        ww = np.ascontiguousarray(ww)
        diag = vhs_relax_weight(0.0, spec.gamma, spec.dt, spec.eps, smeas) * smeas
    else:
        if model.kind != "landau":
            raise UsageError("Landau kernel table requires a landau model")
        ww = landau_direction_weights(grid, hs, table)
        diag = 1.0  # rho -> 0 diffusion kernel acts as the identity
    gain = pair_convolve(f, hs, ww, mode=_engine.MODE_GAIN, prod_cutoff=prod_cutoff)
    gain = gain + grid.cell_volume * f.values**2 * diag
    return Distribution(grid, gain)
