"""Measured Caccioppoli, energy-bound, higher-integrability, Hardy checks."""

import numpy as np
import pytest

from orlicz_lab.errors import GeometryError, PreconditionError, WrongLemmaError
from orlicz_lab.fields import DiscreteField, DomainSpec, build_mesh
from orlicz_lab.inequalities import (
    caccioppoli_boundary,
    caccioppoli_interior,
    energy_bound_check,
    hardy_check,
    higher_integrability_margin,
    refinement_stability,
)
from orlicz_lab.operators import canonical_operator
from orlicz_lab.phi import PowerPhi
from orlicz_lab.solver import ObstacleProblem, default_solver_config, solve_obstacle

UNIT_INTERVAL = DomainSpec("interval", (0.0, 1.0))


def parabola(p):
    return 0.5 - 4.0 * (p[:, 0] - 0.5) ** 2


def solved_parabola(resolution=64, power=2.0):
    mesh = build_mesh(UNIT_INTERVAL, resolution)
    phi = PowerPhi(power)
    problem = ObstacleProblem(
        mesh, phi, canonical_operator(phi),
        DiscreteField.constant(mesh, 0.0),
        DiscreteField.from_function(mesh, parabola),
        default_solver_config(1),
    )
    res = solve_obstacle(problem)
    assert res.converged
    return problem, res


class TestCaccioppoliInterior:
    def test_linear_field_closed_form(self):
        # LHS = 1; RHS = mean of ((x-c)/0.4)^2 over (0.3, 0.7) = 1/12
        mesh = build_mesh(UNIT_INTERVAL, 160)
        u = DiscreteField.from_function(mesh, lambda p: p[:, 0])
        psi = DiscreteField.constant(mesh, -10.0)
        rep = caccioppoli_interior(PowerPhi(2.0), u, psi, ((0.5,), 0.1))
        assert rep.lhs == pytest.approx(1.0, rel=1e-12)
        assert rep.rhs == pytest.approx(1.0 / 12.0, rel=2e-2)
        assert rep.ratio == pytest.approx(12.0, rel=2e-2)

    def test_constant_field_zero_ratio(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        u = DiscreteField.constant(mesh, 2.0)
        rep = caccioppoli_interior(PowerPhi(2.0), u, None, ((0.5,), 0.1))
        assert rep.lhs == 0.0
        assert rep.ratio == 0.0

    def test_contact_region_ratio_stable(self):
        reports = []
        for res in (64, 128):
            problem, sol = solved_parabola(resolution=res)
            reports.append(caccioppoli_interior(
                problem.phi, sol.u, problem.psi, ((0.5,), 0.08)))
        assert reports[0].ratio > 0
        stab = refinement_stability(reports[0], reports[1])
        assert 0.8 <= stab <= 1.2

    def test_ball_escaping_domain_rejected(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        u = DiscreteField.constant(mesh, 0.0)
        with pytest.raises(GeometryError):
            caccioppoli_interior(PowerPhi(2.0), u, None, ((0.1,), 0.1))


class TestCaccioppoliBoundary:
    def test_solution_equal_to_affine_data(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        u = DiscreteField.from_function(mesh, lambda p: p[:, 0])
        rep = caccioppoli_boundary(PowerPhi(2.0), u, u, ((0.05,), 0.1))
        # the |u-f| term vanishes; both sides are phi(|grad f|) means
        assert np.isfinite(rep.ratio)
        assert rep.ratio <= 4.0

    def test_zero_everything(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        z = DiscreteField.constant(mesh, 0.0)
        rep = caccioppoli_boundary(PowerPhi(2.0), z, z, ((0.05,), 0.1))
        assert rep.ratio == 0.0

    def test_solved_problem_stable_across_resolutions(self):
        ratios = []
        for res in (32, 64, 128):
            problem, sol = solved_parabola(resolution=res)
            rep = caccioppoli_boundary(problem.phi, sol.u, problem.f,
                                       ((0.05,), 0.1))
            ratios.append(rep.ratio)
        assert all(np.isfinite(r) for r in ratios)
        assert max(ratios) <= 1.5 * min(r for r in ratios if r > 0)

    def test_interior_ball_rejected(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        u = DiscreteField.constant(mesh, 0.0)
        with pytest.raises(WrongLemmaError):
            caccioppoli_boundary(PowerPhi(2.0), u, u, ((0.5,), 0.1))


class TestEnergyBound:
    def test_solution_equals_data(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        phi = PowerPhi(2.0)
        f = DiscreteField.from_function(mesh, lambda p: p[:, 0])
        problem = ObstacleProblem(mesh, phi, canonical_operator(phi), f,
                                  DiscreteField.constant(mesh, -10.0),
                                  default_solver_config(1))
        res = solve_obstacle(problem)
        rep = energy_bound_check(phi, res.u, f)
        assert rep.ratio == pytest.approx(1.0, rel=1e-6)

    def test_zero_data_zero_solution(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        phi = PowerPhi(2.0)
        f = DiscreteField.constant(mesh, 0.0)
        problem = ObstacleProblem(mesh, phi, canonical_operator(phi), f,
                                  DiscreteField.constant(mesh, -1.0),
                                  default_solver_config(1))
        res = solve_obstacle(problem)
        rep = energy_bound_check(phi, res.u, f)
        assert rep.lhs <= 1e-15
        assert rep.ratio == 0.0

    def test_vanishing_rhs_triggers_reduction(self):
        problem, sol = solved_parabola()
        rep = energy_bound_check(problem.phi, sol.u, problem.f, problem.psi)
        assert rep.extras["rhs_raw"] == 0.0
        assert rep.extras["reduced_to_max_f_psi"]
        assert rep.rhs > 0
        assert np.isfinite(rep.ratio)


class TestHigherIntegrability:
    def test_linear_slope_one(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        u = DiscreteField.from_function(mesh, lambda p: p[:, 0])
        reps = higher_integrability_margin(PowerPhi(2.0), u, u, None, [0.5])
        rep = reps[0]
        assert rep.lhs == pytest.approx(1.0, rel=1e-12)
        assert rep.ratio <= 1.0

    def test_zero_solution(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        z = DiscreteField.constant(mesh, 0.0)
        rep = higher_integrability_margin(PowerPhi(2.0), z, z, None, [0.25])[0]
        assert rep.lhs == 0.0

    def test_solved_ratios_finite_and_stable(self):
        gammas = (0.1, 0.25, 0.5)
        by_res = {}
        for res in (32, 64):
            problem, sol = solved_parabola(resolution=res)
            by_res[res] = higher_integrability_margin(
                problem.phi, sol.u, problem.f, problem.psi, gammas)
        for coarse, fine in zip(by_res[32], by_res[64]):
            assert np.isfinite(coarse.ratio) and coarse.ratio > 0
            assert abs(refinement_stability(coarse, fine) - 1.0) <= 0.2

    def test_gamma_range_enforced(self):
        mesh = build_mesh(UNIT_INTERVAL, 16)
        u = DiscreteField.constant(mesh, 0.0)
        with pytest.raises(PreconditionError):
            higher_integrability_margin(PowerPhi(2.0), u, u, None, [1.5])


class TestHardy:
    def test_tent_ratio_one(self):
        mesh = build_mesh(UNIT_INTERVAL, 64)
        u = DiscreteField.from_function(
            mesh, lambda p: np.minimum(p[:, 0], 1.0 - p[:, 0]))
        rep = hardy_check(PowerPhi(2.0), u)
        assert rep.lhs == pytest.approx(1.0, rel=1e-7)
        assert rep.rhs == pytest.approx(1.0, rel=1e-7)
        assert rep.ratio == pytest.approx(1.0, rel=1e-6)

    def test_zero_field_convention(self):
        mesh = build_mesh(UNIT_INTERVAL, 32)
        rep = hardy_check(PowerPhi(2.0), DiscreteField.constant(mesh, 0.0))
        assert rep.ratio == 0.0

    def test_sine_stable_across_resolutions(self):
        ratios = []
        for res in (64, 128):
            mesh = build_mesh(UNIT_INTERVAL, res)
            u = DiscreteField.from_function(mesh, lambda p: np.sin(np.pi * p[:, 0]))
            ratios.append(hardy_check(PowerPhi(3.0), u).ratio)
        assert abs(ratios[1] / ratios[0] - 1.0) < 0.05

    def test_nonzero_boundary_rejected(self):
        mesh = build_mesh(UNIT_INTERVAL, 32)
        u = DiscreteField.constant(mesh, 1.0)
        with pytest.raises(PreconditionError):
            hardy_check(PowerPhi(2.0), u)
