"""Perturbation experiments: solve a family of obstacle problems and
measure how fast the solutions approach the limit problem's solution.

An experiment fixes a base growth function and operator, a perturbation
law with geometrically decaying magnitude, boundary data and an obstacle.
It certifies the structural conditions for the whole family, solves the
limit and every perturbed problem, and reports per-index distances:
Sobolev modular and Luxemburg distances with exponent margin delta,
local Hoelder distances on shipped compacts, the operator gap, two-sided
domination constants, the energy-bound ratio, and higher-integrability
margins.  The experiment passes when both primary metrics have decayed by
``rho_target`` between the first and last index.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .conditions import (
    SamplingPlan,
    certify_a0,
    certify_a1,
    certify_ainc_adec,
    domination_constant,
)
from .errors import ConfigurationError, NonConvergedError, PreconditionError
from .fields import DiscreteField, DomainSpec, build_mesh
from .metrics import Compact, holder_distance, sobolev_distance
from .operators import (
    PerturbationLaw,
    canonical_operator,
    convergence_gap,
    perturbed_operator,
    perturbed_phi,
)
from .phi import PhiFunction
from .solver import ObstacleProblem, SolverConfig, default_solver_config, solve_obstacle


def theta_schedule(gamma_proxy: float, delta: float) -> float:
    """Exponent for the domination check, from the bookkeeping relation
    (1 + gamma/4)(1 + theta) = 1 + gamma/2.

    ``delta`` must leave room below gamma/4 for the Sobolev margin.
    """
    if gamma_proxy <= 0:
        raise PreconditionError("gamma proxy must be positive")
    if not 0 < delta < gamma_proxy / 4.0:
        raise PreconditionError(
            f"delta must lie in (0, {gamma_proxy / 4.0:g}) for this gamma proxy")
    return (1.0 + gamma_proxy / 2.0) / (1.0 + gamma_proxy / 4.0) - 1.0


@dataclass(frozen=True)
class StabilityExperiment:
    domain: DomainSpec
    resolution: int
    phi: PhiFunction
    law: PerturbationLaw
    f: Callable[[np.ndarray], np.ndarray]
    psi: Callable[[np.ndarray], np.ndarray]
    i_max: int = 8
    delta: float = 0.05
    alpha: float = 0.25
    compacts: Tuple[Compact, ...] = ()
    gamma_proxy: float = 0.4
    t0: float = 1.0
    t_cap: float = 10.0
    i_theta: int = 2
    hi_gammas: Tuple[float, ...] = (0.1, 0.25, 0.5)
    rho_target: float = 0.1
    solver: Optional[SolverConfig] = None
    plan: Optional[SamplingPlan] = None
    a1_radii: Tuple[float, ...] = ()
    beta_min_a0: float = 0.01
    beta_min_a1: float = 0.75
    ainc_adec_ceiling: float = 4.0
    label: str = "stability"

    def __post_init__(self):
        if self.delta <= 0:
            raise ConfigurationError("delta must be positive")
        if not 0 < self.alpha <= 1:
            raise ConfigurationError("alpha must lie in (0, 1]")
        if self.i_max < 4:
            raise ConfigurationError("need at least four perturbation indices")
        if not self.compacts:
            raise ConfigurationError("at least one compact is required")


@dataclass(frozen=True)
class StabilityRow:
    index: int
    modular_distance: float
    luxemburg_distance: float
    holder_distances: Tuple[float, ...]
    operator_gap: float
    domination_forward: float
    domination_backward: float
    energy_ratio: float
    hi_ratios: Tuple[float, ...]
    iterations: int
    pg_residual: float


@dataclass(frozen=True)
class StabilityReport:
    label: str
    rows: Tuple[StabilityRow, ...]
    passed: bool
    sobolev_decay: float
    holder_decay: Tuple[float, ...]
    limit_iterations: int
    limit_energy: float
    theta: float
    limit_energy_ratio: float = np.nan
    limit_hi_ratios: Tuple[float, ...] = ()
    certificates: dict = dataclass_field(default_factory=dict)
    rho_target: float = 0.1


def _default_plan(domain: DomainSpec) -> SamplingPlan:
    from .conditions import plan_for_interval, plan_for_rectangle

    if domain.geometry == "interval":
        a, b = domain.bounds
        return plan_for_interval(a, b, n_spatial=64)
    ax, bx, ay, by = domain.bounds
    return plan_for_rectangle(ax, bx, ay, by, n_per_side=8)


def _default_radii(domain: DomainSpec) -> Tuple[float, ...]:
    if domain.geometry == "interval":
        size = domain.bounds[1] - domain.bounds[0]
        return (0.05 * size, 0.1 * size)
    size = min(domain.bounds[1] - domain.bounds[0],
               domain.bounds[3] - domain.bounds[2])
    return (0.1 * size, 0.2 * size)


def _certify_family(exp: StabilityExperiment, plan: SamplingPlan,
                    radii: Sequence[float]) -> dict:
    """Precondition of the run: the base and every perturbed growth
    function must clear normalization, power-growth, and continuity-in-x
    certification."""
    out = {}
    members = [("limit", exp.phi)] + [
        (f"i={i}", perturbed_phi(exp.phi, exp.law, i))
        for i in range(1, exp.i_max + 1)
    ]
    for name, phi in members:
        a0 = certify_a0(phi, plan, beta_min=exp.beta_min_a0)
        rates = certify_ainc_adec(phi, phi.declared_p, phi.declared_q, plan,
                                  ceiling=exp.ainc_adec_ceiling)
        a1 = certify_a1(phi, plan, radii, beta_min=exp.beta_min_a1)
        out[name] = {"A0": a0, "aInc/aDec": rates, "A1": a1}
        failed = [c for c, cert in out[name].items() if not cert.passed]
        if failed:
            raise ConfigurationError(
                f"certification failed for {name}: {', '.join(failed)}")
    return out


def run_experiment(exp: StabilityExperiment) -> StabilityReport:
    """Solve the limit and perturbed problems and measure convergence."""
    mesh = build_mesh(exp.domain, exp.resolution)
    plan = exp.plan or _default_plan(exp.domain)
    radii = exp.a1_radii or _default_radii(exp.domain)
    certificates = _certify_family(exp, plan, radii)
    theta = theta_schedule(exp.gamma_proxy, exp.delta)

    solver = exp.solver or default_solver_config(exp.domain.dimension)
    f = DiscreteField.from_function(mesh, exp.f)
    psi = DiscreteField.from_function(mesh, exp.psi)
    base_op = canonical_operator(exp.phi)
    limit_problem = ObstacleProblem(mesh, exp.phi, base_op, f, psi, solver)
    limit = solve_obstacle(limit_problem)
    if not limit.converged:
        raise NonConvergedError("limit problem did not converge")

    compact_points = mesh.centroids[exp.compacts[0].contains(mesh.centroids)]
    if compact_points.shape[0] > 64:
        sel = np.linspace(0, compact_points.shape[0] - 1, 64).astype(int)
        compact_points = compact_points[sel]

    from .inequalities import energy_bound_check, higher_integrability_margin

    limit_energy_report = energy_bound_check(exp.phi, limit.u, f, psi)
    limit_hi = higher_integrability_margin(exp.phi, limit.u, f, psi, exp.hi_gammas)

    rows: List[StabilityRow] = []
    for i in range(1, exp.i_max + 1):
        phi_i = perturbed_phi(exp.phi, exp.law, i)
        op_i = perturbed_operator(base_op, i, exp.law)
        problem_i = ObstacleProblem(mesh, phi_i, op_i, f, psi, solver)
        sol_i = solve_obstacle(problem_i)
        if not sol_i.converged:
            raise NonConvergedError(f"perturbed problem i={i} did not converge")
        mod_gap, norm_gap = sobolev_distance(exp.phi, sol_i.u, limit.u, exp.delta)
        holders = tuple(
            holder_distance(sol_i.u, limit.u, K, exp.alpha) for K in exp.compacts)
        gap = convergence_gap(op_i, base_op, compact_points, exp.t_cap, plan)
        dom = domination_constant(phi_i, exp.phi, theta, exp.t0, plan)
        energy = energy_bound_check(phi_i, sol_i.u, f, psi)
        hi = higher_integrability_margin(phi_i, sol_i.u, f, psi, exp.hi_gammas)
        rows.append(StabilityRow(
            index=i,
            modular_distance=mod_gap,
            luxemburg_distance=norm_gap,
            holder_distances=holders,
            operator_gap=gap,
            domination_forward=dom.l_forward,
            domination_backward=dom.l_backward,
            energy_ratio=energy.ratio,
            hi_ratios=tuple(r.ratio for r in hi),
            iterations=sol_i.iterations,
            pg_residual=sol_i.pg_residual,
        ))

    first, last = rows[0], rows[-1]
    sobolev_decay = _decay(first.modular_distance, last.modular_distance)
    holder_decay = tuple(
        _decay(a, b) for a, b in zip(first.holder_distances, last.holder_distances))
    passed = last.modular_distance <= exp.rho_target * first.modular_distance and all(
        lb <= exp.rho_target * fb
        for fb, lb in zip(first.holder_distances, last.holder_distances))
    return StabilityReport(
        label=exp.label,
        rows=tuple(rows),
        passed=bool(passed),
        sobolev_decay=sobolev_decay,
        holder_decay=holder_decay,
        limit_iterations=limit.iterations,
        limit_energy=limit.energy,
        theta=theta,
        limit_energy_ratio=limit_energy_report.ratio,
        limit_hi_ratios=tuple(r.ratio for r in limit_hi),
        certificates=certificates,
        rho_target=exp.rho_target,
    )


def _decay(first: float, last: float) -> float:
    if first == 0.0:
        return 0.0 if last == 0.0 else np.inf
    return last / first


def convergence_metrics(u_list: Sequence[DiscreteField], u_limit: DiscreteField,
                        phi: PhiFunction, delta: float, alpha: float,
                        compacts: Sequence[Compact]) -> List[dict]:
    """Distance rows for an already-solved family of fields."""
    rows = []
    for i, u_i in enumerate(u_list, start=1):
        mod_gap, norm_gap = sobolev_distance(phi, u_i, u_limit, delta)
        rows.append({
            "index": i,
            "modular_distance": mod_gap,
            "luxemburg_distance": norm_gap,
            "holder_distances": tuple(
                holder_distance(u_i, u_limit, K, alpha) for K in compacts),
        })
    return rows
