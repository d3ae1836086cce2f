"""Brute-force cross-checks on explicit pair states.

These routines re-derive, by direct tensor arithmetic on small pair
grids, quantities that the production collision path computes through
the compiled engine: the projected lifted operator (which must coincide
with the direct collision operator applied to a product state), the
closed forms of the pure-loss toy model, and the entropy inequality that
drives the H-theorem across re-tensorization boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .collision import half_directions, q_vhs
from .errors import UsageError
from .grid import CollisionModel, Distribution, VelocityGrid, l1_distance
from .quadrature import SphereQuadrature, sphere_measure

__all__ = [
    "PairState",
    "product_state",
    "project",
    "lifted_identity_check",
    "toy_loss_flow",
    "toy_consecutive",
    "entropy_inequality_check",
    "mutual_information",
    "random_symmetric_state",
]

MAX_PAIR_AXIS = 8  # pair grids are O(n^{2 dim}); this is a cost guard


@dataclass(frozen=True)
class PairState:
    """Dense pair density F(v, w) on the tensor square of a small grid."""

    grid: VelocityGrid
    values: np.ndarray = field(repr=False)  # (size, size), v index major

    def __post_init__(self):
        if self.grid.n > MAX_PAIR_AXIS:
            raise UsageError(
                f"pair grids are capped at n={MAX_PAIR_AXIS} per axis, got n={self.grid.n}"
            )
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.grid.size, self.grid.size):
            raise UsageError(f"pair values must have shape (size, size), got {vals.shape}")
        object.__setattr__(self, "values", vals)

    @property
    def symmetric(self) -> bool:
        return bool(np.allclose(self.values, self.values.T, rtol=0.0, atol=1e-12))

    def mass(self) -> float:
        return self.grid.cell_volume**2 * float(np.sum(self.values))


def product_state(f: Distribution) -> PairState:
    return PairState(f.grid, np.outer(f.values, f.values))


def project(F: PairState) -> Distribution:
    """Marginalize over the second velocity: (pi F)(v) = h^dim sum_w F(v, w)."""
    vals = F.grid.cell_volume * np.sum(F.values, axis=1)
    return Distribution(F.grid, vals)


def _stencil(t: float, n: int):
    """Per-axis hat weights of a point at index coordinate t, or None if
    the two-node stencil is not fully inside the grid."""
    if t < 0.0 or t >= n - 1:
        return None
    b = int(t)
    fr = t - b
    return b, 1.0 - fr, fr


def _node_stencil(point: np.ndarray, n: int, dim: int):
    """Flat-node indices and weights of the multilinear spread of a point."""
    per_axis = []
    for a in range(dim):
        s = _stencil(point[a], n)
        if s is None:
            return None
        per_axis.append(s)
    idx = [0]
    wts = [1.0]
    for b, w0, w1 in per_axis:
        idx = [i * n + b for i in idx] + [i * n + b + 1 for i in idx]
        wts = [w * w0 for w in wts] + [w * w1 for w in wts]
    return np.array(idx, dtype=np.int64), np.array(wts)


def lifted_identity_check(
    f: Distribution, model: CollisionModel, zq: SphereQuadrature
) -> float:
    """l1 distance between the projected lifted operator and q_vhs.

    Builds F = f (x) f, applies the jump operator of the two-particle
    master equation pair-node by pair-node with the same quadrature and
    spreading rules as the engine, projects, and compares.  Both routes
    discretize the same bilinear form, so the distance is rounding noise.
    """
    grid = f.grid
    if model.kind != "boltzmann_vhs":
        raise UsageError("lifted_identity_check supports the boltzmann_vhs model")
    if grid.n > MAX_PAIR_AXIS:
        raise UsageError(f"grid too large for the pair oracle (n > {MAX_PAIR_AXIS})")
    hs = half_directions(zq)
    n, dim = grid.n, grid.dim
    smeas = sphere_measure(dim)
    F = np.outer(f.values, f.values)
    QF = np.zeros_like(F)

    coords = np.stack(
        np.unravel_index(np.arange(grid.size), (n,) * dim), axis=-1
    ).astype(np.float64)
    nh = hs.c1.size

    for p in range(grid.size):
        for q in range(p + 1, grid.size):
            Fpq = F[p, q]
            if Fpq == 0.0:
                continue
            d = coords[p] - coords[q]
            k2 = float(np.dot(d, d))
            u = d / math.sqrt(k2)
            r = 0.5 * math.sqrt(k2)
            mid = 0.5 * (coords[p] + coords[q])
            rho = grid.h * math.sqrt(k2)
            kt = 2.0 * rho**model.gamma / smeas  # symmetrized VHS kernel value
            if dim == 3:
                ux, uy, uz = u
                if -0.6 < ux < 0.6:
                    e1 = np.array([0.0, -uz, uy])
                else:
                    e1 = np.array([-uz, 0.0, ux])
                e1 /= np.linalg.norm(e1)
                e2 = np.cross(u, e1)
            for j in range(nh):
                if dim == 3:
                    xi = hs.c1[j] * u + hs.c2[j] * e1 + hs.c3[j] * e2
                else:
                    xi = np.array(
                        [
                            hs.c1[j] * u[0] - hs.c2[j] * u[1],
                            hs.c1[j] * u[1] + hs.c2[j] * u[0],
                        ]
                    )
                tp = mid + r * xi
                tm = mid - r * xi
                sp = _node_stencil(tp, n, dim)
                sm = _node_stencil(tm, n, dim)
                if sp is None or sm is None:
                    continue
                amt = hs.weights[j] * kt * Fpq
                ip, wp = sp
                im, wm = sm
                QF[np.ix_(ip, im)] += amt * np.outer(wp, wm)
                QF[np.ix_(im, ip)] += amt * np.outer(wm, wp)
                QF[p, q] -= amt
                QF[q, p] -= amt

    lifted = Distribution(grid, grid.cell_volume * np.sum(QF, axis=1) / model.epsilon)
    direct = q_vhs(f, model, zq, prod_cutoff=0.0)
    return l1_distance(lifted, direct)


def toy_loss_flow(f0: Distribution, t: float):
    """Closed forms of the pure-loss model on unit-mass data.

    The direct flow of q f = -f int f is f0 / (1 + t); the lifted pair
    state decays as exp(-t), so the projected lifted solution over one
    window is exp(-t) f0.  Returns (f_exact, lp_exact).
    """
    mass = f0.grid.cell_volume * float(np.sum(f0.values))
    if abs(mass - 1.0) > 1e-10:
        raise UsageError(f"toy loss model requires unit initial mass, got {mass}")
    f_exact = Distribution(f0.grid, f0.values / (1.0 + t))
    lp_exact = Distribution(f0.grid, math.exp(-t) * f0.values)
    return f_exact, lp_exact


def toy_consecutive(f0: Distribution, t: float, steps: int) -> Distribution:
    """Consecutive lifted windows for the pure-loss model.

    The shape is invariant, only the mass c evolves; one window of
    length dt maps c to c exp(-c dt) (the window is traversed in the
    unit-mass rescaled time).  First-order consistent with 1/(1+t).
    """
    if steps < 1:
        raise UsageError("steps must be >= 1")
    mass = f0.grid.cell_volume * float(np.sum(f0.values))
    if abs(mass - 1.0) > 1e-10:
        raise UsageError(f"toy loss model requires unit initial mass, got {mass}")
    dt = t / steps
    c = 1.0
    for _ in range(steps):
        c = c * math.exp(-c * dt)
    return Distribution(f0.grid, c * f0.values)


def mutual_information(F: PairState) -> float:
    """I(F) = H(F) - 2 H(pi F) for a unit-mass symmetric positive state."""
    h_f, h_proj = entropy_inequality_check(F, assert_inequality=False)
    return h_f - h_proj


def entropy_inequality_check(F: PairState, assert_inequality: bool = True):
    """Entropies across a re-tensorization: returns (H(F), H(piF (x) piF)).

    For a unit-mass, strictly positive, symmetric pair state the mutual
    information H(F) - 2 H(pi F) is non-negative, with equality exactly
    on product states; this is the jump inequality of the consecutive
    flow's entropy decay.
    """
    vals = F.values
    if np.any(vals <= 0.0):
        raise UsageError("entropy inequality requires a strictly positive pair state")
    if not F.symmetric:
        raise UsageError("entropy inequality requires a symmetric pair state")
    if abs(F.mass() - 1.0) > 1e-8:
        raise UsageError(f"pair state must have unit mass, got {F.mass()}")
    w = F.grid.cell_volume
    h_f = w * w * float(np.sum(vals * np.log(vals)))
    pf = w * np.sum(vals, axis=1)
    h_proj = 2.0 * w * float(np.sum(pf * np.log(pf)))
    if assert_inequality and h_proj > h_f + 1e-10:
        raise ArithmeticError(
            f"entropy inequality violated: H(piF x piF) = {h_proj} > H(F) = {h_f}"
        )
    return h_f, h_proj


def random_symmetric_state(
    grid: VelocityGrid, rng: np.random.Generator, correlated: bool = True
) -> PairState:
    """Unit-mass, strictly positive, symmetric pair state for entropy tests."""
    f = 0.2 + rng.random(grid.size)
    vals = np.outer(f, f)
    if correlated:
        a = rng.random((grid.size, grid.size))
        vals = vals * (1.0 + 0.5 * (a + a.T) / 2.0)
    vals /= grid.cell_volume**2 * np.sum(vals)
    return PairState(grid, vals)
