"""Quadrature rules on the unit circle and the unit sphere.

The collision integrals need rules that are antipodally closed (node set
invariant under zeta -> -zeta with equal weights); this is what makes the
odd moments of the scattering direction vanish exactly in the discrete
collision sums.  Both rules here are antipodal when their azimuthal count
is even.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError

__all__ = ["SphereQuadrature", "circle_rule", "sphere_rule", "integrate_sphere", "sphere_measure"]


def sphere_measure(dim: int) -> float:
    """|S^{dim-1}|: 2 pi for dim=2, 4 pi for dim=3."""
    if dim == 2:
        return 2.0 * math.pi
    if dim == 3:
        return 4.0 * math.pi
    raise UsageError(f"dim must be 2 or 3, got {dim}")


@dataclass(frozen=True)
class SphereQuadrature:
    """Nodes and positive weights on S^{dim-1}."""

    dim: int
    nodes: np.ndarray = field(repr=False)  # (m, dim) unit vectors
    weights: np.ndarray = field(repr=False)  # (m,)
    # polar structure of the product rule; used by the collision engine
    # to evaluate zonal kernels at the fixed polar cosines
    polar_cos: np.ndarray = field(repr=False, default=None)  # (m,) cos(theta_j)
    polar_index: np.ndarray = field(repr=False, default=None)  # (m,) int index into theta levels

    def __post_init__(self):
        nodes = np.ascontiguousarray(self.nodes, dtype=np.float64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def count(self) -> int:
        return self.nodes.shape[0]

    @property
    def antipodal(self) -> bool:
        """True when every node's antipode is a node with equal weight."""
        m = self.count
        for j in range(m):
            d = np.sum(np.abs(self.nodes + self.nodes[j]), axis=1)
            k = int(np.argmin(d))
            if d[k] > 1e-12 or abs(self.weights[k] - self.weights[j]) > 1e-12:
                return False
        return True


def circle_rule(m: int) -> SphereQuadrature:
    """m equispaced angles with uniform weight 2 pi / m.

    Exact for trigonometric polynomials of degree below m.
    """
    if m < 2:
        raise UsageError(f"circle rule needs m >= 2, got {m}")
    phi = 2.0 * math.pi * np.arange(m) / m
    nodes = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    weights = np.full(m, 2.0 * math.pi / m)
    # the circle rule's "polar" angle is the azimuth itself
    return SphereQuadrature(
        dim=2, nodes=nodes, weights=weights, polar_cos=np.cos(phi), polar_index=np.arange(m)
    )


def sphere_rule(n_theta: int, n_phi: int) -> SphereQuadrature:
    """Gauss-Legendre x trapezoid product rule on S^2.

    n_theta Gauss-Legendre points in cos(theta), n_phi equispaced azimuths.
    Integrates spherical harmonics exactly up to degree
    min(2 n_theta - 1, n_phi - 1); antipodally closed for even n_phi.
    """
    if n_theta < 2:
        raise UsageError(f"sphere rule needs n_theta >= 2, got {n_theta}")
    if n_phi < 4:
        raise UsageError(f"sphere rule needs n_phi >= 4, got {n_phi}")
    mu, glw = np.polynomial.legendre.leggauss(n_theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(1.0 - mu**2)
    nodes = np.empty((n_theta * n_phi, 3))
    weights = np.empty(n_theta * n_phi)
    polar_cos = np.empty(n_theta * n_phi)
    polar_index = np.empty(n_theta * n_phi, dtype=np.int64)
    for i in range(n_theta):
        for k in range(n_phi):
            j = i * n_phi + k
            nodes[j] = (s[i] * math.cos(phi[k]), s[i] * math.sin(phi[k]), mu[i])
            weights[j] = glw[i] * (2.0 * math.pi / n_phi)
            polar_cos[j] = mu[i]
            polar_index[j] = i
    return SphereQuadrature(
        dim=3, nodes=nodes, weights=weights, polar_cos=polar_cos, polar_index=polar_index
    )


def integrate_sphere(q: SphereQuadrature, g) -> float:
    """Sum of w_j g(zeta_j); g may be a callable on nodes or an array of node values.

    The spherical average of g is integrate_sphere(q, g) / |S^{dim-1}|.
    """
    if callable(g):
        vals = np.array([g(q.nodes[j]) for j in range(q.count)], dtype=np.float64)
    else:
        vals = np.asarray(g, dtype=np.float64)
        if vals.shape != (q.count,):
            raise UsageError(f"expected {q.count} node values, got shape {vals.shape}")
    return float(np.dot(q.weights, vals))
