"""Closed-form kernels of the lifted collision semigroup.

On each sphere of constant pair separation rho = |v - w|, the lifted
Landau dynamics is heat flow on S^{d-1} with diffusion coefficient
4 rho^gamma, so the propagator over a window t is the spherical heat
kernel with rescaled time:

* circle (d=2), angle difference a:
      K(rho, a, t) = (1/2pi) [1 + 2 sum_{k>=1} exp(-k^2 4 rho^gamma t) cos(k a)]
* sphere (d=3), cosine mu between directions:
      K(rho, mu, t) = (1/4pi) sum_l (2l+1) exp(-l(l+1) 4 rho^gamma t) P_l(mu)

The (2l+1) multiplicity makes K a delta sequence as t -> 0 and gives the
semigroup property; ``multiplicity=False`` reproduces the series without
it (also unit mass, but no identity limit) for comparison.

For the VHS Boltzmann model the lifted flow relaxes exponentially toward
the spherical average, and the off-identity transition weight is
(1 - exp(-rho^gamma t / eps)) / |S^{d-1}|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TruncationError, UsageError
from .grid import VelocityGrid
from .quadrature import SphereQuadrature, circle_rule, sphere_measure, sphere_rule

__all__ = [
    "KernelSpec",
    "KernelTable",
    "heat_kernel_circle",
    "heat_kernel_sphere",
    "vhs_relax_weight",
    "build_kernel_table",
    "default_rho_levels",
    "default_rule",
    "dump_kernel_table",
]

KINDS = ("landau_circle", "landau_sphere", "vhs_relax")

MASS_RENORM_LIMIT = 1e-3  # beyond this the series truncation is unusable


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to tabulate and at which lifted-time window."""

    kind: str
    dim: int
    gamma: float
    eps: float
    dt: float
    series_cutoff: int = 14  # l_max (sphere) or k_max (circle); unused for vhs_relax
    multiplicity: bool = True  # sphere series only; False drops the (2l+1) factor

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "landau_circle" and self.dim != 2:
            raise UsageError("landau_circle kernel requires dim=2")
        if self.kind == "landau_sphere" and self.dim != 3:
            raise UsageError("landau_sphere kernel requires dim=3")
        if self.dim not in (2, 3):
            raise UsageError(f"dim must be 2 or 3, got {self.dim}")
        if not self.dt > 0.0:
            raise UsageError(f"dt must be positive, got {self.dt}")
        if not self.eps > 0.0:
            raise UsageError(f"eps must be positive, got {self.eps}")
        if self.kind != "vhs_relax" and self.series_cutoff < 1:
            raise UsageError("series_cutoff must be >= 1 for Landau kernels")

    @property
    def tau(self) -> float:
        """Lifted integration window with the Knudsen scaling applied."""
        return self.dt / self.eps


@dataclass(frozen=True)
class KernelTable:
    """Kernel values over rho levels x angle nodes.

    For Landau kinds each row is normalized so that its quadrature mass
    under ``rule`` is exactly 1 (the kernel is a transition probability).
    VHS rows store only the off-identity relaxation weight, which is
    constant in angle with mass 1 - exp(-rho^gamma dt/eps) < 1.
    """

    spec: KernelSpec
    rho_levels: np.ndarray = field(repr=False)
    angle_nodes: np.ndarray = field(repr=False)  # angles (circle) or cosines (sphere)
    values: np.ndarray = field(repr=False)  # (n_rho, n_angle)

    def __post_init__(self):
        object.__setattr__(self, "rho_levels", np.asarray(self.rho_levels, dtype=np.float64))
        object.__setattr__(self, "angle_nodes", np.asarray(self.angle_nodes, dtype=np.float64))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))


def _legendre_all(mu: float, l_max: int) -> np.ndarray:
    """P_0..P_lmax at mu by the stable three-term recurrence."""
    p = np.empty(l_max + 1)
    p[0] = 1.0
    if l_max >= 1:
        p[1] = mu
    for l in range(1, l_max):
        p[l + 1] = ((2 * l + 1) * mu * p[l] - l * p[l - 1]) / (l + 1)
    return p


def heat_kernel_circle(rho: float, gamma: float, t: float, angle: float, k_max: int) -> float:
    """Heat kernel on S^1 at angle difference ``angle``, truncated at k_max modes."""
    if not t > 0.0:
        raise UsageError("heat_kernel_circle needs t > 0 (t=0 delta is not representable)")
    if not rho > 0.0:
        raise UsageError("heat_kernel_circle needs rho > 0")
    a = 4.0 * rho**gamma * t
    acc = 1.0
    for k in range(1, k_max + 1):
        acc += 2.0 * math.exp(-(k * k) * a) * math.cos(k * angle)
    return acc / (2.0 * math.pi)


def heat_kernel_sphere(
    rho: float, gamma: float, t: float, mu: float, l_max: int, multiplicity: bool = True
) -> float:
    """Heat kernel on S^2 at direction cosine mu, truncated at degree l_max."""
    if not t > 0.0:
        raise UsageError("heat_kernel_sphere needs t > 0 (t=0 delta is not representable)")
    if not rho > 0.0:
        raise UsageError("heat_kernel_sphere needs rho > 0")
    if abs(mu) > 1.0 + 1e-12:
        raise UsageError(f"mu={mu} outside [-1, 1]")
    mu = min(1.0, max(-1.0, mu))
    a = 4.0 * rho**gamma * t
    p = _legendre_all(mu, l_max)
    acc = 0.0
    for l in range(l_max + 1):
        fac = (2 * l + 1) if multiplicity else 1
        acc += fac * math.exp(-l * (l + 1) * a) * p[l]
    return acc / (4.0 * math.pi)


def vhs_relax_weight(rho: float, gamma: float, t: float, eps: float, sphere_meas: float) -> float:
    """Off-identity weight of the exact VHS relaxation over a window t.

    Equals (1 - exp(-rho^gamma t/eps)) / |S^{d-1}|, with the rho = 0 limits
    taken so the function is total: 0 for gamma > 0, the Maxwell value for
    gamma = 0, full relaxation 1/|S^{d-1}| for gamma < 0.
    """
    if rho == 0.0:
        if gamma > 0.0:
            return 0.0
        if gamma == 0.0:
            return -math.expm1(-t / eps) / sphere_meas
        return 1.0 / sphere_meas
    try:
        s = rho**gamma * t / eps
    except OverflowError:
        # rho^gamma overflows for tiny rho and negative gamma: fully relaxed
        return 1.0 / sphere_meas
    return -math.expm1(-s) / sphere_meas


def default_rho_levels(grid: VelocityGrid, count: int = 64) -> np.ndarray:
    """Geometric rho grid covering every pair separation on ``grid``."""
    lo = grid.h / 2.0
    hi = 2.0 * grid.extent * math.sqrt(grid.dim)
    return np.geomspace(lo, hi, count)


def default_rule(dim: int) -> SphereQuadrature:
    """Module-default quadrature: 32 angles (2D), 8x16 Gauss-trapezoid (3D)."""
    return circle_rule(32) if dim == 2 else sphere_rule(8, 16)


def _row_values(spec: KernelSpec, rho: float, angle_nodes: np.ndarray) -> np.ndarray:
    tau = spec.tau
    if spec.kind == "landau_circle":
        return np.array(
            [heat_kernel_circle(rho, spec.gamma, tau, a, spec.series_cutoff) for a in angle_nodes]
        )
    if spec.kind == "landau_sphere":
        return np.array(
            [
                heat_kernel_sphere(
                    rho, spec.gamma, tau, mu, spec.series_cutoff, spec.multiplicity
                )
                for mu in angle_nodes
            ]
        )
    w = vhs_relax_weight(rho, spec.gamma, spec.dt, spec.eps, sphere_measure(spec.dim))
    return np.full(angle_nodes.shape, w)


def build_kernel_table(
    spec: KernelSpec,
    rho_levels: np.ndarray,
    angle_nodes: np.ndarray | None = None,
    rule: SphereQuadrature | None = None,
) -> KernelTable:
    """Tabulate the kernel over rho levels x angle nodes.

    Landau rows are rescaled by their quadrature mass under ``rule`` so the
    stored rows integrate to exactly 1; a raw-mass deviation above 1e-3
    means the series cutoff cannot represent this diffusion time and is an
    error.  Angle nodes default to the rule's own polar nodes, which is
    the layout the collision engine consumes.
    """
    rho_levels = np.asarray(rho_levels, dtype=np.float64)
    if rho_levels.ndim != 1 or rho_levels.size == 0:
        raise UsageError("rho_levels must be a non-empty 1-D array")
    if np.any(rho_levels <= 0.0) or np.any(np.diff(rho_levels) <= 0.0):
        raise UsageError("rho_levels must be positive and strictly increasing")
    if rule is None:
        rule = default_rule(spec.dim)
    if rule.dim != spec.dim:
        raise UsageError(f"rule dim {rule.dim} does not match kernel dim {spec.dim}")

    if angle_nodes is None:
        if spec.dim == 2:
            angle_nodes = np.arctan2(rule.nodes[:, 1], rule.nodes[:, 0])
        else:
            angle_nodes = np.unique(rule.polar_cos)
    angle_nodes = np.asarray(angle_nodes, dtype=np.float64)

    values = np.empty((rho_levels.size, angle_nodes.size))
    for i, rho in enumerate(rho_levels):
        row = _row_values(spec, rho, angle_nodes)
        if spec.kind != "vhs_relax":
            # row mass measured with the rule, independent of the stored nodes
            if spec.dim == 2:
                meter = np.arctan2(rule.nodes[:, 1], rule.nodes[:, 0])
            else:
                meter = rule.polar_cos
            mass = float(np.dot(rule.weights, _row_values(spec, rho, meter)))
            if abs(mass - 1.0) >= MASS_RENORM_LIMIT:
                raise TruncationError(
                    f"kernel row mass {mass:.6g} at rho={rho:.6g}: series cutoff "
                    f"{spec.series_cutoff} too small for this diffusion time"
                )
            row = row / mass
        if not np.all(np.isfinite(row)):
            raise TruncationError(f"non-finite kernel values at rho={rho:.6g}")
        values[i] = row
    return KernelTable(spec=spec, rho_levels=rho_levels, angle_nodes=angle_nodes, values=values)


def dump_kernel_table(table: KernelTable, path) -> None:
    """Text dump: header, rho levels, angle nodes, then one row per level."""
    s = table.spec
    with open(path, "w") as fh:
        fh.write(
            f"{s.kind} {s.gamma:.17g} {s.dt:.17g} {s.eps:.17g} "
            f"{table.rho_levels.size} {table.angle_nodes.size}\n"
        )
        fh.write(" ".join(f"{r:.17g}" for r in table.rho_levels) + "\n")
        fh.write(" ".join(f"{a:.17g}" for a in table.angle_nodes) + "\n")
        for row in table.values:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")
