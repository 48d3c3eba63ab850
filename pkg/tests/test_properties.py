"""Property-based invariants of the calculus and the discrete metrics."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orlicz_lab.fields import DiscreteField, DomainSpec, build_mesh
from orlicz_lab.metrics import Compact, holder_seminorm, luxemburg_norm, modular
from orlicz_lab.phi import (
    CoefficientField,
    DoublePhasePhi,
    OrliczLogPhi,
    PowerPhi,
    VariableExponentPhi,
    conjugate_eval,
    constant_field,
    eval_phi,
    inverse,
)
from orlicz_lab.stability import theta_schedule

UNIT_INTERVAL = DomainSpec("interval", (0.0, 1.0))

families = st.sampled_from(["power", "double_phase", "orlicz_log", "varexp"])


def build_family(name, p, q, a):
    if name == "power":
        return PowerPhi(p)
    if name == "double_phase":
        return DoublePhasePhi(p, max(p, q), constant_field(a))
    if name == "orlicz_log":
        return OrliczLogPhi(p)
    return VariableExponentPhi(
        CoefficientField(lambda pts, p=p, q=q: p + (max(p, q) - p) * pts[:, 0],
                         p, max(p, q)))


@st.composite
def phi_and_params(draw):
    name = draw(families)
    p = draw(st.floats(1.1, 3.5))
    q = draw(st.floats(1.1, 4.5))
    a = draw(st.floats(0.0, 2.0))
    return build_family(name, p, q, a)


X = np.array([[0.37]])


class TestPhiProperties:
    @settings(max_examples=60, deadline=None)
    @given(phi_and_params(), st.floats(1e-6, 1e3), st.floats(1.0, 4.0))
    def test_monotone_in_t(self, phi, t, factor):
        lo = eval_phi(phi, X, t)
        hi = eval_phi(phi, X, t * factor)
        assert hi >= lo * (1.0 - 1e-12)

    @settings(max_examples=60, deadline=None)
    @given(phi_and_params())
    def test_zero_at_zero(self, phi):
        assert eval_phi(phi, X, 0.0) == 0.0

    @settings(max_examples=40, deadline=None)
    @given(phi_and_params(), st.floats(1e-3, 50.0))
    def test_inverse_sandwich(self, phi, t):
        tau = eval_phi(phi, X, t)
        back = inverse(phi, X, tau)
        assert back == pytest.approx(t, abs=1e-8, rel=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(phi_and_params(), st.floats(1e-3, 20.0), st.floats(1e-3, 20.0))
    def test_young_inequality(self, phi, s, t):
        lhs = s * t
        rhs = eval_phi(phi, X, s) + conjugate_eval(phi, X, t)
        assert lhs <= rhs + 1e-9 * (1.0 + lhs)

    @settings(max_examples=30, deadline=None)
    @given(phi_and_params(), st.floats(1e-2, 10.0), st.floats(1e-2, 10.0))
    def test_conjugate_midpoint_convexity(self, phi, s1, s2):
        mid = conjugate_eval(phi, X, 0.5 * (s1 + s2))
        ends = 0.5 * (conjugate_eval(phi, X, s1) + conjugate_eval(phi, X, s2))
        assert mid <= ends + 1e-8 * (1.0 + abs(ends))

    @settings(max_examples=30, deadline=None)
    @given(st.floats(1.1, 4.0), st.floats(1e-2, 1e2))
    def test_power_young_equality_case(self, p, t):
        # s = rate(t) makes Young an equality for exact powers
        phi = PowerPhi(p)
        s = float(phi.rate(X, t))
        lhs = s * t
        rhs = eval_phi(phi, X, t) + conjugate_eval(phi, X, s)
        assert lhs == pytest.approx(rhs, rel=1e-7)


class TestMetricProperties:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(4, 64), st.floats(0.1, 5.0))
    def test_luxemburg_absolute_homogeneity(self, resolution, c):
        mesh = build_mesh(UNIT_INTERVAL, resolution)
        phi = DoublePhasePhi(2.0, 4.0, constant_field(1.0))
        g = np.abs(np.sin(7.0 * mesh.centroids[:, 0])) + 0.1
        base = luxemburg_norm(phi, mesh, g)
        scaled = luxemburg_norm(phi, mesh, c * g)
        assert scaled == pytest.approx(c * base, rel=1e-6)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 50))
    def test_cell_measures_partition_domain(self, resolution):
        mesh = build_mesh(UNIT_INTERVAL, resolution)
        assert mesh.cell_measures.sum() == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 16))
    def test_lshape_measure(self, half_resolution):
        mesh = build_mesh(DomainSpec("lshape", (0, 1, 0, 1)), 2 * half_resolution)
        assert mesh.cell_measures.sum() == pytest.approx(0.75, abs=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
    def test_affine_gradient_exact_2d(self, cx, cy):
        mesh = build_mesh(DomainSpec("rectangle", (0, 1, 0, 1)), 4)
        u = DiscreteField.from_function(
            mesh, lambda p: cx * p[:, 0] + cy * p[:, 1] + 1.0)
        g = u.gradient()
        assert np.allclose(g[:, 0], cx, atol=1e-12)
        assert np.allclose(g[:, 1], cy, atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.15, 0.3), st.floats(0.05, 0.15), st.floats(0.1, 1.0))
    def test_holder_monotone_under_inclusion(self, lo, shrink, alpha):
        mesh = build_mesh(UNIT_INTERVAL, 48)
        u = DiscreteField.from_function(mesh, lambda p: np.cos(5 * p[:, 0]))
        outer = Compact((lo,), (1.0 - lo,))
        inner = Compact((lo + shrink,), (1.0 - lo - shrink,))
        s_out = holder_seminorm(u, outer, alpha).seminorm
        s_in = holder_seminorm(u, inner, alpha).seminorm
        assert s_in <= s_out + 1e-14

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.05, 2.0))
    def test_theta_schedule_relation(self, gamma):
        theta = theta_schedule(gamma, gamma / 8.0)
        assert (1 + gamma / 4.0) * (1 + theta) == pytest.approx(1 + gamma / 2.0)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(0.1, 3.0), st.floats(0.0, 0.8))
    def test_modular_power_margin_consistency(self, scale, delta):
        mesh = build_mesh(UNIT_INTERVAL, 16)
        phi = PowerPhi(2.0)
        g = np.full(mesh.n_cells, scale)
        direct = modular(phi, mesh, g, power=delta)
        assert direct == pytest.approx((scale ** 2) ** (1 + delta), rel=1e-12)
