"""Modulars, Luxemburg norms, Sobolev distances, and Hölder seminorms.

All integrals use midpoint (centroid) quadrature: exact for the cellwise
constant gradients of P1 fields, first order otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigurationError, GeometryError
from .fields import DiscreteField, Mesh, require_same_mesh
from .phi import PhiFunction


def modular(phi: PhiFunction, mesh: Mesh, cell_values: np.ndarray,
            power: float = 0.0) -> float:
    """Integral of phi(x, |g|)^{1+power} for cellwise data g."""
    if power < 0:
        raise ConfigurationError("power margin must be >= 0")
    g = np.abs(np.asarray(cell_values, dtype=float))
    if g.shape != (mesh.n_cells,):
        raise ConfigurationError(
            f"cell data has shape {g.shape}, expected ({mesh.n_cells},)")
    vals = phi.eval(mesh.centroids, g)
    if power != 0.0:
        vals = vals ** (1.0 + power)
    return float(np.dot(mesh.cell_measures, vals))


def luxemburg_norm(phi: PhiFunction, mesh: Mesh, cell_values: np.ndarray,
                   power: float = 0.0, rtol: float = 1e-8) -> float:
    """inf{ lambda > 0 : modular(g / lambda) <= 1 } by bisection on lambda."""
    g = np.abs(np.asarray(cell_values, dtype=float))
    if not np.any(g > 0):
        return 0.0

    def rho(lam: float) -> float:
        return modular(phi, mesh, g / lam, power=power)

    hi = 1.0
    for _ in range(2000):
        if rho(hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise ConfigurationError("no finite Luxemburg bracket found")
    lo = hi
    for _ in range(2000):
        if rho(lo) > 1.0:
            break
        lo /= 2.0
        if lo < 1e-300:
            return 0.0
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if rho(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
    return hi


def field_magnitudes(u: DiscreteField) -> Tuple[np.ndarray, np.ndarray]:
    """(|u| at centroids, |grad u| per cell) for a nodal field."""
    grad = u.gradient()
    return np.abs(u.centroid_values()), np.linalg.norm(grad, axis=1)


def sobolev_distance(phi: PhiFunction, u: DiscreteField, v: DiscreteField,
                     delta: float = 0.0) -> Tuple[float, float]:
    """Distance of u and v in the Sobolev space of phi^{1+delta}.

    Returns (modular_gap, norm_gap): the summed modulars of |u-v| and
    |grad(u-v)| with exponent margin delta, and the corresponding sum of
    Luxemburg norms.
    """
    mesh = require_same_mesh(u, v)
    diff = u - v
    mag, grad_mag = field_magnitudes(diff)
    modular_gap = modular(phi, mesh, mag, power=delta) + \
        modular(phi, mesh, grad_mag, power=delta)
    norm_gap = luxemburg_norm(phi, mesh, mag, power=delta) + \
        luxemburg_norm(phi, mesh, grad_mag, power=delta)
    return modular_gap, norm_gap


@dataclass(frozen=True)
class Compact:
    """Axis-aligned closed box strictly inside the domain."""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or any(a >= b for a, b in zip(lo, hi)):
            raise ConfigurationError("compact needs lower < upper per axis")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(points)
        mask = np.ones(pts.shape[0], dtype=bool)
        for k, (a, b) in enumerate(zip(self.lower, self.upper)):
            mask &= (pts[:, k] >= a) & (pts[:, k] <= b)
        return mask

    def margin_to(self, domain) -> float:
        """Distance from the box to the domain boundary (0 if the box
        leaves the domain; boundary sampled densely for nonconvex
        geometries)."""
        probes = _box_boundary_points(self.lower, self.upper)
        if not bool(np.all(domain.contains(probes, tol=-1e-12))):
            return 0.0
        segs = domain.boundary_segments()
        best = np.inf
        from .fields import _segment_distance
        for seg in segs:
            best = min(best, float(np.min(_segment_distance(probes, seg[0], seg[1]))))
        return best


def _box_boundary_points(lower, upper, per_edge: int = 65) -> np.ndarray:
    if len(lower) == 1:
        return np.linspace(lower[0], upper[0], per_edge).reshape(-1, 1)
    gx = np.linspace(lower[0], upper[0], per_edge)
    gy = np.linspace(lower[1], upper[1], per_edge)
    edges = [
        np.column_stack([gx, np.full_like(gx, lower[1])]),
        np.column_stack([gx, np.full_like(gx, upper[1])]),
        np.column_stack([np.full_like(gy, lower[0]), gy]),
        np.column_stack([np.full_like(gy, upper[0]), gy]),
    ]
    return np.vstack(edges)


@dataclass(frozen=True)
class HolderNorm:
    seminorm: float
    sup: float

    @property
    def norm(self) -> float:
        return self.sup + self.seminorm


def holder_seminorm(u: DiscreteField, compact: Compact, alpha: float,
                    min_margin: Optional[float] = None) -> HolderNorm:
    """max over node pairs in the compact of |u(x)-u(y)| / |x-y|^alpha.

    Also returns the sup of |u| over the compact, so that
    ``result.norm`` is the full local Hölder norm.  The compact must sit
    strictly inside the domain by at least ``min_margin`` (default 10% of
    the domain diameter).
    """
    if not 0 < alpha <= 1:
        raise ConfigurationError("alpha must lie in (0, 1]")
    mesh = u.mesh
    domain = mesh.domain
    if min_margin is None:
        if domain.geometry == "interval":
            diam = domain.bounds[1] - domain.bounds[0]
        else:
            ax, bx, ay, by = domain.bounds
            diam = float(np.hypot(bx - ax, by - ay))
        min_margin = 0.1 * diam
    if compact.margin_to(domain) < min_margin - 1e-12:
        raise GeometryError(
            f"compact margin {compact.margin_to(domain):.3g} below required "
            f"{min_margin:.3g}")
    mask = compact.contains(mesh.nodes)
    idx = np.flatnonzero(mask)
    if idx.size < 2:
        raise GeometryError("compact contains fewer than two mesh nodes")
    pts = mesh.nodes[idx]
    vals = u.values[idx]
    diff = np.abs(vals[:, None] - vals[None, :])
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    iu = np.triu_indices(idx.size, k=1)
    ratios = diff[iu] / dist[iu] ** alpha
    return HolderNorm(seminorm=float(np.max(ratios)), sup=float(np.max(np.abs(vals))))


def holder_distance(u: DiscreteField, v: DiscreteField, compact: Compact,
                    alpha: float, min_margin: Optional[float] = None) -> float:
    """Local Hölder norm of u - v on the compact."""
    require_same_mesh(u, v)
    return holder_seminorm(u - v, compact, alpha, min_margin=min_margin).norm
