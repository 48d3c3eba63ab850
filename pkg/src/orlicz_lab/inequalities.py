"""Measured energy inequalities on solved obstacle problems.

The underlying estimates hide implicit constants, so nothing here asserts
a bound: each check reports the two sides with the constant slot set to 1
and the ratio LHS/RHS.  The testable contracts are finiteness, stability
under mesh refinement, and uniformity along perturbation sequences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import GeometryError, PreconditionError, WrongLemmaError
from .fields import DiscreteField, DomainSpec, Mesh, require_same_mesh
from .metrics import luxemburg_norm, modular
from .phi import PhiFunction


@dataclass(frozen=True)
class InequalityReport:
    inequality: str
    lhs: float
    rhs: float
    ratio: float
    geometry: dict = field(default_factory=dict)
    resolution: int = 0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.lhs) and np.isfinite(self.rhs)):
            raise PreconditionError("inequality sides must be finite")


def _ratio(lhs: float, rhs: float) -> float:
    if lhs == 0.0:
        return 0.0
    return lhs / rhs if rhs > 0.0 else np.inf


def _ball_cells(mesh: Mesh, center, radius: float) -> np.ndarray:
    c = np.asarray(center, dtype=float).reshape(1, -1)
    return np.linalg.norm(mesh.centroids - c, axis=1) < radius


def _cell_mean(mesh: Mesh, mask: np.ndarray, values: np.ndarray) -> float:
    w = mesh.cell_measures[mask]
    if w.size == 0:
        raise GeometryError("ball contains no cells at this resolution")
    return float(np.dot(w, values[mask]) / w.sum())


def caccioppoli_interior(phi: PhiFunction, u: DiscreteField,
                         psi: Optional[DiscreteField],
                         ball: Tuple[Sequence[float], float]) -> InequalityReport:
    """Gradient energy on a ball against oscillation on the doubled ball.

    LHS: mean over B of phi(x, |grad u|).  RHS: mean over 2B of
    phi(x, |u - u_2B| / diam 2B) + phi(x, |psi - psi_2B| / diam 2B)
    + phi(x, |grad psi|), with integral means and centroid quadrature.
    """
    center, radius = ball
    mesh = u.mesh
    center = np.asarray(center, dtype=float).reshape(-1)
    dist = float(mesh.domain.boundary_distance(center.reshape(1, -1))[0])
    if dist <= 2.0 * radius:
        raise GeometryError(
            f"doubled ball exits the domain (boundary distance {dist:.3g} "
            f"<= 2r = {2 * radius:.3g})")
    in_b = _ball_cells(mesh, center, radius)
    in_2b = _ball_cells(mesh, center, 2.0 * radius)
    diam = 4.0 * radius
    gu = np.linalg.norm(u.gradient(), axis=1)
    lhs = _cell_mean(mesh, in_b, phi.eval(mesh.centroids, gu))

    ubar = u.centroid_values()
    u_mean = _cell_mean(mesh, in_2b, ubar)
    rhs_vals = phi.eval(mesh.centroids, np.abs(ubar - u_mean) / diam)
    if psi is not None:
        require_same_mesh(u, psi)
        pbar = psi.centroid_values()
        p_mean = _cell_mean(mesh, in_2b, pbar)
        gpsi = np.linalg.norm(psi.gradient(), axis=1)
        rhs_vals = rhs_vals + phi.eval(mesh.centroids, np.abs(pbar - p_mean) / diam)
        rhs_vals = rhs_vals + phi.eval(mesh.centroids, gpsi)
    rhs = _cell_mean(mesh, in_2b, rhs_vals)
    return InequalityReport(
        "caccioppoli_interior", lhs, rhs, _ratio(lhs, rhs),
        geometry={"center": center.tolist(), "radius": float(radius)},
        resolution=mesh.resolution,
        extras={"cells_B": int(in_b.sum()), "cells_2B": int(in_2b.sum())},
    )


def caccioppoli_boundary(phi: PhiFunction, u: DiscreteField, f: DiscreteField,
                         ball: Tuple[Sequence[float], float]) -> InequalityReport:
    """Boundary variant: gradient energy near the boundary against the
    boundary data's energy and the scaled deviation |u - f|.

    Normalizations use the full ball measures |B| and |2B| while the
    integrals run over the meshed part of the domain.
    """
    center, radius = ball
    mesh = u.mesh
    require_same_mesh(u, f)
    center = np.asarray(center, dtype=float).reshape(-1)
    if not bool(mesh.domain.contains(center.reshape(1, -1))[0]):
        raise GeometryError("ball center must lie inside the domain")
    dist = float(mesh.domain.boundary_distance(center.reshape(1, -1))[0])
    if dist >= 2.0 * radius:
        raise WrongLemmaError(
            "doubled ball stays inside the domain; use the interior estimate")
    dim = mesh.dimension
    b_measure = 2.0 * radius if dim == 1 else np.pi * radius ** 2
    bb_measure = b_measure * (2.0 ** dim)
    in_b = _ball_cells(mesh, center, radius)
    in_2b = _ball_cells(mesh, center, 2.0 * radius)
    diam = 4.0 * radius
    gu = np.linalg.norm(u.gradient(), axis=1)
    lhs = float(np.dot(mesh.cell_measures[in_b],
                       phi.eval(mesh.centroids, gu)[in_b])) / b_measure
    gf = np.linalg.norm(f.gradient(), axis=1)
    dev = np.abs(u.centroid_values() - f.centroid_values()) / diam
    rhs_vals = phi.eval(mesh.centroids, gf) + phi.eval(mesh.centroids, dev)
    rhs = float(np.dot(mesh.cell_measures[in_2b], rhs_vals[in_2b])) / bb_measure
    return InequalityReport(
        "caccioppoli_boundary", lhs, rhs, _ratio(lhs, rhs),
        geometry={"center": center.tolist(), "radius": float(radius)},
        resolution=mesh.resolution,
        extras={"cells_B": int(in_b.sum()), "cells_2B": int(in_2b.sum())},
    )


def energy_bound_check(phi_i: PhiFunction, u_i: DiscreteField,
                       f: DiscreteField,
                       psi: Optional[DiscreteField] = None) -> InequalityReport:
    """Solution gradient modular against the boundary datum's.

    When the raw right side vanishes while the left does not (e.g. f = 0
    with an active obstacle), the check substitutes the admissible
    reduction f <- max(f, psi) and records that it did; the reduced datum
    is the one the bound is actually tested with downstream.
    """
    mesh = require_same_mesh(u_i, f)
    gu = np.linalg.norm(u_i.gradient(), axis=1)
    lhs = modular(phi_i, mesh, gu)
    gf = np.linalg.norm(f.gradient(), axis=1)
    rhs_raw = modular(phi_i, mesh, gf)
    reduced = False
    rhs = rhs_raw
    if rhs_raw == 0.0 and lhs > 0.0 and psi is not None:
        require_same_mesh(u_i, psi)
        f_red = DiscreteField(mesh, np.maximum(f.values, psi.values))
        rhs = modular(phi_i, mesh, np.linalg.norm(f_red.gradient(), axis=1))
        reduced = True
    return InequalityReport(
        "energy_bound", lhs, rhs, _ratio(lhs, rhs),
        resolution=mesh.resolution,
        extras={"rhs_raw": rhs_raw, "reduced_to_max_f_psi": reduced},
    )


def higher_integrability_margin(phi: PhiFunction, u: DiscreteField,
                                f: DiscreteField, psi: Optional[DiscreteField],
                                gammas: Sequence[float]) -> List[InequalityReport]:
    """Self-improvement margins: the (1+gamma)-modular of phi(x, |grad u|)
    against its first-power counterpart plus the data terms plus 1."""
    mesh = require_same_mesh(u, f)
    gu = np.linalg.norm(u.gradient(), axis=1)
    gf = np.linalg.norm(f.gradient(), axis=1)
    gpsi = None
    if psi is not None:
        require_same_mesh(u, psi)
        gpsi = np.linalg.norm(psi.gradient(), axis=1)
    base = modular(phi, mesh, gu)
    out = []
    for gamma in gammas:
        if not 0 < gamma < 1:
            raise PreconditionError("gamma must lie in (0, 1)")
        lhs = modular(phi, mesh, gu, power=gamma)
        rhs = base ** (1.0 + gamma) + modular(phi, mesh, gf, power=gamma) + 1.0
        if gpsi is not None:
            rhs += modular(phi, mesh, gpsi, power=gamma)
        out.append(InequalityReport(
            "higher_integrability", lhs, rhs, _ratio(lhs, rhs),
            resolution=mesh.resolution, extras={"gamma": float(gamma)},
        ))
    return out


def refinement_stability(coarse: InequalityReport,
                         fine: InequalityReport) -> float:
    """Ratio of the fine-mesh ratio to the coarse-mesh ratio (1 = stable)."""
    if coarse.ratio == 0.0 and fine.ratio == 0.0:
        return 1.0
    if coarse.ratio == 0.0:
        return np.inf
    return fine.ratio / coarse.ratio


def hardy_check(phi: PhiFunction, u: DiscreteField,
                domain: Optional[DomainSpec] = None,
                boundary_tol: float = 1e-12) -> InequalityReport:
    """Luxemburg norm of u / dist(., boundary) against that of |grad u|.

    Requires u to vanish at boundary nodes; the distance is exact for the
    shipped geometries.  The 0/0 case reports ratio 0 by convention.
    """
    mesh = u.mesh
    domain = domain or mesh.domain
    if np.any(np.abs(u.values[mesh.boundary_mask]) > boundary_tol):
        raise PreconditionError("hardy check needs zero boundary values")
    dist = domain.boundary_distance(mesh.centroids)
    quotient = np.abs(u.centroid_values()) / dist
    lhs = luxemburg_norm(phi, mesh, quotient)
    gu = np.linalg.norm(u.gradient(), axis=1)
    rhs = luxemburg_norm(phi, mesh, gu)
    return InequalityReport(
        "hardy", lhs, rhs, _ratio(lhs, rhs),
        resolution=mesh.resolution,
        extras={"geometry": domain.geometry},
    )
