"""Command-line entry point: certify | solve | inequalities | stability.

Every subcommand reads one experiment config, runs its stage, writes a CSV
of report rows (stable column order, locale-independent formatting, 17
significant digits) and exits 0 exactly when every emitted pass flag is
true.  Identical config and seed give byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .conditions import (
    SamplingPlan,
    canonical_a2_witness,
    certify_a0,
    certify_a1,
    certify_a2,
    certify_ainc_adec,
    check_young,
)
from .config import ExperimentConfig, parse_config
from .errors import OrliczLabError
from .fields import DiscreteField, build_mesh, write_field
from .inequalities import (
    caccioppoli_boundary,
    caccioppoli_interior,
    hardy_check,
    higher_integrability_margin,
)
from .operators import canonical_operator, certify_structure
from .solver import ObstacleProblem, solve_obstacle
from .stability import StabilityExperiment, run_experiment


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    index: int
    resolution: int
    metric: str
    value: float
    passed: bool

    def format(self) -> str:
        flag = "true" if self.passed else "false"
        return (f"{self.experiment},{self.index},{self.resolution},"
                f"{self.metric},{self.value:.17g},{flag}")


CSV_HEADER = "experiment,index,resolution,metric,value,pass"


def write_rows(rows: List[ReportRow], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            fh.write(row.format() + "\n")


def build_plan(cfg: ExperimentConfig) -> SamplingPlan:
    from .conditions import plan_for_interval, plan_for_rectangle

    grid = dict(t_min=cfg.t_min, t_max=cfg.t_max, count=cfg.t_count)
    if cfg.domain.geometry == "interval":
        a, b = cfg.domain.bounds
        plan = plan_for_interval(a, b, n_spatial=cfg.n_spatial, **grid)
    else:
        ax, bx, ay, by = cfg.domain.bounds
        plan = plan_for_rectangle(ax, bx, ay, by, n_per_side=cfg.n_spatial, **grid)
    return SamplingPlan(plan.points, plan.t_grid, pair_count=cfg.pair_count,
                        seed=cfg.seed)


def build_problem(cfg: ExperimentConfig) -> ObstacleProblem:
    mesh = build_mesh(cfg.domain, cfg.resolution)
    f = DiscreteField.from_function(mesh, cfg.f)
    psi = DiscreteField.from_function(mesh, cfg.psi) if cfg.psi is not None else None
    op = canonical_operator(cfg.phi)
    return ObstacleProblem(mesh, cfg.phi, op, f, psi, cfg.solver)


def build_experiment(cfg: ExperimentConfig) -> StabilityExperiment:
    if cfg.psi is None:
        raise OrliczLabError("stability experiments need an obstacle expression")
    return StabilityExperiment(
        domain=cfg.domain,
        resolution=cfg.resolution,
        phi=cfg.phi,
        law=cfg.law,
        f=cfg.f,
        psi=cfg.psi,
        i_max=cfg.i_max,
        delta=cfg.delta,
        alpha=cfg.alpha,
        compacts=cfg.compacts,
        gamma_proxy=cfg.gamma_proxy,
        t0=cfg.t0,
        t_cap=cfg.t_cap,
        hi_gammas=cfg.hi_gammas,
        rho_target=cfg.rho_target,
        solver=cfg.solver,
        plan=build_plan(cfg),
        a1_radii=cfg.a1_radii,
        beta_min_a0=cfg.beta_min_a0,
        beta_min_a1=cfg.beta_min_a1,
        ainc_adec_ceiling=cfg.ainc_ceiling,
        label=cfg.experiment_id,
    )


def run_certify(cfg: ExperimentConfig) -> List[ReportRow]:
    plan = build_plan(cfg)
    phi = cfg.phi
    res = cfg.resolution
    rows = []

    def add(metric, value, passed, index=0):
        rows.append(ReportRow(cfg.experiment_id, index, res, metric,
                              float(value), bool(passed)))

    a0 = certify_a0(phi, plan, beta_min=cfg.beta_min_a0)
    add("certificate.A0.beta", a0.constant, a0.passed)
    rates = certify_ainc_adec(phi, phi.declared_p, phi.declared_q, plan,
                              ceiling=cfg.ainc_ceiling)
    add("certificate.aInc.L_p", rates.witness["L_p"], rates.passed)
    add("certificate.aDec.L_q", rates.witness["L_q"], rates.passed)
    a1 = certify_a1(phi, plan, cfg.a1_radii, beta_min=cfg.beta_min_a1)
    add("certificate.A1.beta", a1.constant, a1.passed)
    a2 = certify_a2(phi, canonical_a2_witness(phi), plan)
    add("certificate.A2.worst_gap", a2.constant, a2.passed)
    young = check_young(phi, plan)
    add("certificate.young.max_violation", young.max_violation, young.passed)
    structure = certify_structure(canonical_operator(phi), phi, plan,
                                  seed=cfg.seed)
    add("certificate.structure.c1", structure.c1, structure.passed)
    add("certificate.structure.c2", structure.c2, structure.passed)
    add("certificate.structure.margin", structure.monotonicity_margin,
        structure.passed)
    return rows


def run_solve(cfg: ExperimentConfig, out_dir: Path) -> List[ReportRow]:
    problem = build_problem(cfg)
    result = solve_obstacle(problem)
    res = cfg.resolution
    rows = []

    def add(metric, value, passed):
        rows.append(ReportRow(cfg.experiment_id, 0, res, metric,
                              float(value), bool(passed)))

    add("solve.iterations", result.iterations, result.converged)
    add("solve.pg_residual", result.pg_residual,
        result.pg_residual <= problem.config.tol_pg)
    tol_vi = problem.config.tol_vi_rel * (1.0 + result.energy)
    add("solve.vi_residual", result.vi_residual, result.vi_residual >= -tol_vi)
    add("solve.energy", result.energy, np.isfinite(result.energy))
    feasible = problem.psi is None or bool(
        np.all(result.u.values >= problem.psi.values))
    add("solve.feasible", float(feasible), feasible)
    b = problem.mesh.boundary_mask
    pinned = bool(np.array_equal(result.u.values[b], problem.f.values[b]))
    add("solve.boundary_pinned", float(pinned), pinned)

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / f"{cfg.experiment_id}_solution.txt", "w") as fh:
        write_field(result.u, fh)
    return rows


def _shipped_balls(problem: ObstacleProblem):
    """Deterministic interior and boundary balls for the report."""
    domain = problem.mesh.domain
    if domain.geometry == "interval":
        a, b = domain.bounds
        center = np.array([0.5 * (a + b)])
        interior_r = (b - a) / 8.0
        boundary_center = np.array([a + (b - a) / 16.0])
        boundary_r = (b - a) / 8.0
    else:
        ax, bx, ay, by = domain.bounds
        if domain.geometry == "lshape":
            center = np.array([ax + (bx - ax) / 4.0, ay + (by - ay) / 4.0])
        else:
            center = np.array([0.5 * (ax + bx), 0.5 * (ay + by)])
        interior_r = min(bx - ax, by - ay) / 10.0
        boundary_center = np.array([ax + (bx - ax) / 16.0, 0.5 * (ay + by)])
        boundary_r = (bx - ax) / 8.0
    return (center, interior_r), (boundary_center, boundary_r)


def run_inequalities(cfg: ExperimentConfig) -> List[ReportRow]:
    problem = build_problem(cfg)
    result = solve_obstacle(problem)
    res = cfg.resolution
    rows = []

    def add(metric, value, passed, index=0):
        rows.append(ReportRow(cfg.experiment_id, index, res, metric,
                              float(value), bool(passed)))

    add("solve.converged", float(result.converged), result.converged)
    interior_ball, boundary_ball = _shipped_balls(problem)
    rep = caccioppoli_interior(cfg.phi, result.u, problem.psi, interior_ball)
    add("caccioppoli.interior.ratio", rep.ratio, np.isfinite(rep.ratio))
    rep = caccioppoli_boundary(cfg.phi, result.u, problem.f, boundary_ball)
    add("caccioppoli.boundary.ratio", rep.ratio, np.isfinite(rep.ratio))
    for hi in higher_integrability_margin(cfg.phi, result.u, problem.f,
                                          problem.psi, cfg.hi_gammas):
        add(f"higher_integrability.gamma_{hi.extras['gamma']:g}.ratio",
            hi.ratio, np.isfinite(hi.ratio))
    zero_trace = result.u - problem.f
    hardy = hardy_check(cfg.phi, zero_trace)
    add("hardy.ratio", hardy.ratio, np.isfinite(hardy.ratio))
    return rows


def run_stability(cfg: ExperimentConfig) -> List[ReportRow]:
    report = run_experiment(build_experiment(cfg))
    res = cfg.resolution
    rows = []
    for row in report.rows:
        def add(metric, value, passed=True, index=row.index):
            rows.append(ReportRow(cfg.experiment_id, index, res, metric,
                                  float(value), bool(passed)))

        add("stability.modular_distance", row.modular_distance)
        add("stability.luxemburg_distance", row.luxemburg_distance)
        for k, h in enumerate(row.holder_distances):
            add(f"stability.holder_distance.K{k}", h)
        add("stability.operator_gap", row.operator_gap)
        add("stability.domination_forward", row.domination_forward,
            np.isfinite(row.domination_forward))
        add("stability.domination_backward", row.domination_backward,
            np.isfinite(row.domination_backward))
        add("stability.energy_ratio", row.energy_ratio,
            np.isfinite(row.energy_ratio))
        for gamma, ratio in zip(cfg.hi_gammas, row.hi_ratios):
            add(f"stability.hi_ratio.gamma_{gamma:g}", ratio, np.isfinite(ratio))
        add("stability.iterations", row.iterations)
    rows.append(ReportRow(cfg.experiment_id, 0, res, "stability.limit_energy_ratio",
                          float(report.limit_energy_ratio),
                          bool(np.isfinite(report.limit_energy_ratio))))
    for gamma, ratio in zip(cfg.hi_gammas, report.limit_hi_ratios):
        rows.append(ReportRow(cfg.experiment_id, 0, res,
                              f"stability.limit_hi_ratio.gamma_{gamma:g}",
                              float(ratio), bool(np.isfinite(ratio))))
    rows.append(ReportRow(cfg.experiment_id, 0, res, "stability.sobolev_decay",
                          float(report.sobolev_decay),
                          report.sobolev_decay <= cfg.rho_target))
    for k, h in enumerate(report.holder_decay):
        rows.append(ReportRow(cfg.experiment_id, 0, res,
                              f"stability.holder_decay.K{k}", float(h),
                              h <= cfg.rho_target))
    rows.append(ReportRow(cfg.experiment_id, 0, res, "stability.passed",
                          float(report.passed), report.passed))
    return rows


_STAGES = {
    "certify": run_certify,
    "solve": run_solve,
    "inequalities": run_inequalities,
    "stability": run_stability,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="orlicz-lab",
        description="Generalized Orlicz growth laboratory: certification, "
                    "obstacle solves, inequality reports, stability runs.")
    parser.add_argument("stage", choices=sorted(_STAGES))
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--resolution", type=int, default=None,
                        help="mesh resolution override")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config, seed=args.seed,
                           resolution_override=args.resolution,
                           out_override=args.out)
        out_dir = Path(cfg.output_dir)
        if args.stage == "solve":
            rows = run_solve(cfg, out_dir)
        else:
            rows = _STAGES[args.stage](cfg)
    except OrliczLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    csv_path = out_dir / f"{cfg.experiment_id}_{args.stage}.csv"
    write_rows(rows, csv_path)
    all_passed = all(r.passed for r in rows)
    print(f"{args.stage}: {len(rows)} rows -> {csv_path} "
          f"({'all pass' if all_passed else 'FAILURES'})")
    return 0 if all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
