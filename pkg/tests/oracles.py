"""Independent reference solvers used to validate the obstacle solver.

These deliberately use different algorithm families than the library
(interior-point QP with an exact KKT polish, and cyclic coordinate
minimization) so that agreement is meaningful.
"""

import numpy as np


def qp_oracle(mesh, psi_values, f_left=0.0, f_right=0.0):
    """Exact solution of min sum (u_{j+1}-u_j)^2/h with u >= psi, pinned ends.

    cvxpy locates the active set; an exact KKT polish (linear solve on the
    free nodes) removes the interior-point solve's residual error.
    """
    import cvxpy as cp

    n = mesh.n_nodes
    h = float(mesh.cell_measures[0])
    u = cp.Variable(n)
    objective = cp.Minimize(cp.sum_squares(u[1:] - u[:-1]) / h)
    cons = [u >= psi_values, u[0] == f_left, u[-1] == f_right]
    cp.Problem(objective, cons).solve(solver=cp.CLARABEL)
    sol = np.asarray(u.value)
    active = sol - psi_values < 1e-7
    active[0] = active[-1] = False
    fixed = active.copy()
    fixed[0] = fixed[-1] = True
    vals = np.where(active, psi_values, sol)
    vals[0], vals[-1] = f_left, f_right
    free = np.flatnonzero(~fixed)
    lap = (np.diag(np.full(n, 2.0)) - np.diag(np.ones(n - 1), 1)
           - np.diag(np.ones(n - 1), -1))
    if free.size:
        rhs = -lap[np.ix_(free, np.flatnonzero(fixed))] @ vals[np.flatnonzero(fixed)]
        vals[free] = np.linalg.solve(lap[np.ix_(free, free)], rhs)
    # KKT sanity: free nodes above the obstacle, active nodes with a
    # non-negative multiplier
    assert np.all(vals[free] >= psi_values[free] - 1e-9)
    assert np.all((lap @ vals)[active] >= -1e-8)
    return vals


def coordinate_descent_oracle(mesh, power, psi_values, sweeps=4000, tol=1e-13):
    """Cyclic nodal minimization of sum h |du/h|^p with clamping."""
    from scipy.optimize import minimize_scalar

    h = float(mesh.cell_measures[0])
    u = np.maximum(np.zeros(mesh.n_nodes), psi_values)
    u[0] = u[-1] = 0.0
    for _ in range(sweeps):
        biggest = 0.0
        for j in range(1, mesh.n_nodes - 1):
            left, right = u[j - 1], u[j + 1]

            def local(val):
                return (abs(val - left) ** power
                        + abs(right - val) ** power) / h ** (power - 1)

            lo = psi_values[j]
            bracket_hi = max(left, right, lo) + 1.0
            res = minimize_scalar(local, bounds=(lo, bracket_hi), method="bounded",
                                  options={"xatol": 1e-14})
            new = max(res.x, lo)
            biggest = max(biggest, abs(new - u[j]))
            u[j] = new
        if biggest < tol:
            break
    return u
