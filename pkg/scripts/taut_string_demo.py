#!/usr/bin/env python3
"""Demonstrate the 1-d taut-string degeneracy of constant-exponent laws.

Solves the parabola-obstacle problem for several power exponents on the
same mesh and prints the pairwise max-norm differences: they sit at
solver-noise level because the 1-d minimizer of any convex function of
the slope (with no source term) is the same taut string.  This is why the
shipped exponent-law stability run perturbs an x-dependent exponent.
"""

import argparse

import numpy as np

from orlicz_lab.fields import DiscreteField, DomainSpec, build_mesh
from orlicz_lab.operators import canonical_operator
from orlicz_lab.phi import PowerPhi
from orlicz_lab.solver import ObstacleProblem, default_solver_config, solve_obstacle


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--resolution", type=int, default=64)
    ap.add_argument("--powers", nargs="*", type=float, default=[2.0, 2.5, 3.0, 4.0])
    args = ap.parse_args()

    mesh = build_mesh(DomainSpec("interval", (0.0, 1.0)), args.resolution)
    psi = DiscreteField.from_function(
        mesh, lambda p: 0.5 - 4.0 * (p[:, 0] - 0.5) ** 2)
    f = DiscreteField.constant(mesh, 0.0)
    solutions = {}
    for p in args.powers:
        phi = PowerPhi(p)
        problem = ObstacleProblem(mesh, phi, canonical_operator(phi), f, psi,
                                  default_solver_config(1))
        res = solve_obstacle(problem)
        solutions[p] = res.u.values
        print(f"p = {p:<4}: {res.iterations:>5} iterations, "
              f"pg = {res.pg_residual:.2e}, energy = {res.energy:.8f}")
    base = args.powers[0]
    print(f"\nmax-norm gaps to the p = {base} solution:")
    for p in args.powers[1:]:
        gap = float(np.max(np.abs(solutions[p] - solutions[base])))
        print(f"  p = {p:<4}: {gap:.3e}")


if __name__ == "__main__":
    main()
