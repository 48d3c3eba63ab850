"""Discrete obstacle problems and their projected-descent solver.

The discrete problem: find u with u >= psi at every node and u = f on
boundary nodes such that the variational inequality

    sum_cells |cell| A(x_c, grad u) . grad(w - u) >= 0

holds for admissible competitors w.  For gradient-type operators this is
the unique minimizer of E(u) = sum |cell| phi(x_c, |grad u|) over the
polyhedral admissible set, and the solver runs a spectral projected
gradient descent with a monotone backtracking line search (clamping to
the obstacle and pinning the boundary are exact projections).  Stopping
couples the projected-gradient norm with sampled VI residuals, so the
defining inequality is tested directly rather than only its optimization
proxy.

Operators that are not gradients fall back to a fixed-point descent on
the VI residual; this path is experimental (``SolveResult.experimental``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    InfeasibleError,
    PreconditionError,
    UndefinedRatioError,
)
from .fields import DiscreteField, Mesh, require_same_mesh
from .metrics import modular
from .operators import OperatorHandle


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 200_000
    tol_pg: float = 1e-9
    tol_vi_rel: float = 1e-8
    step_rule: str = "backtracking"      # "backtracking" | "fixed"
    initial_point: str = "max"           # "max" | "high_constant"
    fixed_step: float = 1e-2
    armijo: float = 1e-4
    bb_min: float = 1e-10
    bb_max: float = 1e8
    check_every: int = 1

    def __post_init__(self):
        if self.step_rule not in ("backtracking", "fixed"):
            raise ConfigurationError(f"unknown step rule {self.step_rule!r}")
        if self.initial_point not in ("max", "high_constant"):
            raise ConfigurationError(f"unknown initial point rule {self.initial_point!r}")
        if self.tol_pg <= 0 or self.tol_vi_rel <= 0:
            raise ConfigurationError("tolerances must be positive")


def default_solver_config(dimension: int, **overrides) -> SolverConfig:
    tol_pg = 1e-9 if dimension == 1 else 1e-7
    return SolverConfig(**{"tol_pg": tol_pg, **overrides})


@dataclass(frozen=True)
class ObstacleProblem:
    mesh: Mesh
    phi: object                    # growth function of this problem's space
    operator: OperatorHandle
    f: DiscreteField               # boundary data, given as a whole field
    psi: Optional[DiscreteField]   # None = unconstrained (obstacle -inf)
    config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        anchor = DiscreteField.constant(self.mesh, 0.0)
        require_same_mesh(anchor, self.f,
                          *([self.psi] if self.psi is not None else []))
        if self.psi is not None:
            b = self.mesh.boundary_mask
            if np.any(self.psi.values[b] > self.f.values[b] + 1e-13):
                raise InfeasibleError(
                    "obstacle exceeds the boundary data on boundary nodes; "
                    "the admissible set is empty")

    def project(self, values: np.ndarray) -> np.ndarray:
        out = values.copy()
        if self.psi is not None:
            np.maximum(out, self.psi.values, out=out)
        out[self.mesh.boundary_mask] = self.f.values[self.mesh.boundary_mask]
        return out

    def initial_values(self, rule: Optional[str] = None) -> np.ndarray:
        rule = rule or self.config.initial_point
        if rule == "max":
            base = self.f.values.copy()
            if self.psi is not None:
                base = np.maximum(base, self.psi.values)
        else:
            top = float(np.max(self.f.values))
            if self.psi is not None:
                top = max(top, float(np.max(self.psi.values)))
            base = np.full(self.mesh.n_nodes, top + 1.0)
        return self.project(base)


@dataclass(frozen=True)
class SolveResult:
    u: DiscreteField
    iterations: int
    pg_residual: float
    vi_residual: float
    energy: float
    converged: bool
    experimental: bool = False
    start_rule: str = "max"
    energy_monotone: bool = True


def assemble_residual(op: OperatorHandle, mesh: Mesh, values: np.ndarray) -> np.ndarray:
    """Nodal vector r with r_j = integral A(x, grad u) . grad(basis_j)."""
    grad = np.einsum("mkd,mk->md", mesh.basis_gradients, values[mesh.cells])
    flux = op(mesh.centroids, grad)
    contrib = np.einsum("mkd,md->mk", mesh.basis_gradients, flux) * \
        mesh.cell_measures[:, None]
    r = np.zeros(mesh.n_nodes)
    np.add.at(r, mesh.cells, contrib)
    return r


def _energy(problem: ObstacleProblem, values: np.ndarray) -> float:
    phi_e = problem.operator.energy_phi
    mesh = problem.mesh
    grad = np.einsum("mkd,mk->md", mesh.basis_gradients, values[mesh.cells])
    return modular(phi_e, mesh, np.linalg.norm(grad, axis=1))


def _probe_vi_min(problem: ObstacleProblem, values: np.ndarray,
                  r: np.ndarray) -> float:
    """Smallest sampled VI residual r . (w - u) over the probe family.

    Probes: upward nodal hats, downward chords to the obstacle, the
    feasible envelope max(f, psi), and its midpoint with u.
    """
    mesh = problem.mesh
    interior = ~mesh.boundary_mask
    worst = 0.0
    # upward hats: w - u = hat_j
    worst = min(worst, float(np.min(r[interior])))
    # downward chords: each free node pulled to the obstacle
    if problem.psi is not None:
        slack = values - problem.psi.values
        down = -r * slack
        worst = min(worst, float(np.min(down[interior])))
    envelope = problem.initial_values("max")
    worst = min(worst, float(np.dot(r, envelope - values)))
    worst = min(worst, float(np.dot(r, 0.5 * (envelope - values))))
    return worst


def solve_obstacle(problem: ObstacleProblem,
                   start: Optional[str] = None) -> SolveResult:
    """Solve the discrete obstacle problem.

    Gradient-type operators minimize the energy by spectral projected
    gradient steps with monotone backtracking; the solve stops when the
    unit-step projected-gradient norm falls below ``tol_pg`` and every
    sampled VI residual clears ``-tol_vi``.
    """
    cfg = problem.config
    mesh = problem.mesh
    op = problem.operator
    gradient_type = op.is_gradient
    u = problem.initial_values(start)
    r = assemble_residual(op, mesh, u)
    energy = _energy(problem, u) if gradient_type else np.inf
    monotone = True
    alpha = cfg.fixed_step if cfg.step_rule == "fixed" else 1.0
    pg = np.inf
    vi_min = -np.inf
    it = 0
    for it in range(1, cfg.max_iter + 1):
        step = problem.project(u - r) - u
        pg = float(np.max(np.abs(step)))
        tol_vi = cfg.tol_vi_rel * (1.0 + (energy if gradient_type else 0.0))
        if pg <= cfg.tol_pg and it % cfg.check_every == 0:
            vi_min = _probe_vi_min(problem, u, r)
            if vi_min >= -tol_vi:
                return SolveResult(
                    u=DiscreteField(mesh, u), iterations=it, pg_residual=pg,
                    vi_residual=vi_min, energy=_energy(problem, u) if gradient_type else
                    float(np.max(np.abs(r))), converged=True,
                    experimental=not gradient_type,
                    start_rule=start or cfg.initial_point,
                    energy_monotone=monotone)
        if gradient_type and cfg.step_rule == "backtracking":
            d = problem.project(u - alpha * r) - u
            gd = float(np.dot(r, d))
            if gd >= 0.0:
                # spectral step produced no descent direction; fall back
                d = step
                gd = float(np.dot(r, d))
                if gd >= 0.0:
                    vi_min = _probe_vi_min(problem, u, r)
                    converged = pg <= cfg.tol_pg and vi_min >= -tol_vi
                    if not converged:
                        warnings.warn("projected descent stalled before tolerance")
                    return SolveResult(
                        u=DiscreteField(mesh, u), iterations=it, pg_residual=pg,
                        vi_residual=vi_min, energy=energy, converged=converged,
                        experimental=False, start_rule=start or cfg.initial_point,
                        energy_monotone=monotone)
            lam = 1.0
            e_trial = _energy(problem, u + d)
            while e_trial > energy + cfg.armijo * lam * gd and lam > 1e-14:
                lam *= 0.5
                e_trial = _energy(problem, u + lam * d)
            u_new = u + lam * d
            if e_trial > energy + 1e-15 * (1.0 + abs(energy)):
                monotone = False
            r_new = assemble_residual(op, mesh, u_new)
            s = u_new - u
            y = r_new - r
            sy = float(np.dot(s, y))
            if sy > 0:
                alpha = min(max(float(np.dot(s, s)) / sy, cfg.bb_min), cfg.bb_max)
            else:
                alpha = cfg.bb_max
            u, r, energy = u_new, r_new, e_trial
        else:
            # fixed step rule, and the experimental non-gradient path:
            # damped fixed-point iteration on the projected residual
            lam = alpha if cfg.step_rule == "fixed" else 1.0
            u_new = problem.project(u - lam * r)
            r_new = assemble_residual(op, mesh, u_new)
            if not gradient_type:
                # crude step control: shrink while the residual map grows
                tries = 0
                while float(np.max(np.abs(u_new - problem.project(u_new - r_new)))) \
                        > 2.0 * pg and tries < 40:
                    lam *= 0.5
                    u_new = problem.project(u - lam * r)
                    r_new = assemble_residual(op, mesh, u_new)
                    tries += 1
            else:
                e_new = _energy(problem, u_new)
                if e_new > energy + 1e-15 * (1.0 + abs(energy)):
                    monotone = False
                energy = e_new
            u, r = u_new, r_new

    vi_min = _probe_vi_min(problem, u, r)
    warnings.warn(
        f"obstacle solve hit the iteration cap ({cfg.max_iter}) at "
        f"pg={pg:.3e}; returning a non-converged result")
    return SolveResult(
        u=DiscreteField(mesh, u), iterations=it, pg_residual=pg,
        vi_residual=vi_min, energy=energy if gradient_type else float(np.max(np.abs(r))),
        converged=False, experimental=not gradient_type,
        start_rule=start or cfg.initial_point, energy_monotone=monotone)


def vi_residual(op: OperatorHandle, u: DiscreteField, w: DiscreteField,
                psi: Optional[DiscreteField] = None,
                f: Optional[DiscreteField] = None,
                admissibility_tol: float = 1e-12) -> float:
    """Centroid-quadrature value of integral A(x, grad u) . grad(w - u).

    When ``psi``/``f`` are supplied, w is required to be admissible
    (w >= psi, w = f on boundary nodes) and a violation raises.
    """
    mesh = require_same_mesh(u, w)
    if psi is not None and np.any(w.values < psi.values - admissibility_tol):
        raise PreconditionError("competitor drops below the obstacle")
    if f is not None:
        b = mesh.boundary_mask
        if np.any(np.abs(w.values[b] - f.values[b]) > admissibility_tol):
            raise PreconditionError("competitor does not match the boundary data")
    r = assemble_residual(op, mesh, u.values)
    return float(np.dot(r, w.values - u.values))


@dataclass(frozen=True)
class SupersolutionReport:
    passed: bool
    min_value: float
    violations: List[int]


def supersolution_check(op: OperatorHandle, u: DiscreteField,
                        probes: Sequence[DiscreteField],
                        tol: float = 1e-8) -> SupersolutionReport:
    """Check integral A(x, grad u) . grad w >= -tol for each probe.

    Probes must be non-negative with zero boundary values.
    """
    mesh = u.mesh
    r = assemble_residual(op, mesh, u.values)
    values = []
    for k, w in enumerate(probes):
        require_same_mesh(u, w)
        if np.any(w.values < -1e-14):
            raise PreconditionError(f"probe {k} is negative somewhere")
        if np.any(np.abs(w.values[mesh.boundary_mask]) > 1e-14):
            raise PreconditionError(f"probe {k} has nonzero boundary values")
        values.append(float(np.dot(r, w.values)))
    values = np.asarray(values)
    bad = np.flatnonzero(values < -tol)
    return SupersolutionReport(
        passed=bad.size == 0,
        min_value=float(values.min()) if values.size else 0.0,
        violations=bad.tolist(),
    )


def hat_probes(mesh: Mesh, nodes: Optional[Sequence[int]] = None,
               height: float = 1.0) -> List[DiscreteField]:
    """Nodal hat functions at interior nodes (all of them by default)."""
    if nodes is None:
        nodes = mesh.interior_nodes()
    out = []
    for j in nodes:
        vals = np.zeros(mesh.n_nodes)
        vals[j] = height
        out.append(DiscreteField(mesh, vals))
    return out


def quasiminimizer_ratio(phi, u: DiscreteField, v: DiscreteField,
                         region: Optional[np.ndarray] = None) -> float:
    """Ratio of gradient modulars of u and v over cells where they disagree."""
    mesh = require_same_mesh(u, v)
    gu = np.linalg.norm(u.gradient(), axis=1)
    gv = np.linalg.norm(v.gradient(), axis=1)
    disagree = gu != gv
    if region is not None:
        disagree &= np.asarray(region, dtype=bool)
    if not disagree.any():
        raise UndefinedRatioError("u and v have identical gradients on the region")
    w = mesh.cell_measures[disagree]
    x = mesh.centroids[disagree]
    num = float(np.dot(w, phi.eval(x, gu[disagree])))
    den = float(np.dot(w, phi.eval(x, gv[disagree])))
    if den == 0.0:
        return np.inf
    return num / den
