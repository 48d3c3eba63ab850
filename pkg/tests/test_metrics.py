"""Modulars, Luxemburg norms, Sobolev distances, Hölder seminorms."""

import numpy as np
import pytest
from scipy.optimize import brentq

from orlicz_lab.errors import GeometryError, MeshMismatchError
from orlicz_lab.fields import DiscreteField, DomainSpec, build_mesh
from orlicz_lab.metrics import (
    Compact,
    field_magnitudes,
    holder_distance,
    holder_seminorm,
    luxemburg_norm,
    modular,
    sobolev_distance,
)
from orlicz_lab.phi import DoublePhasePhi, PowerPhi, constant_field

UNIT_INTERVAL = DomainSpec("interval", (0.0, 1.0))


@pytest.fixture(scope="module")
def mesh64():
    return build_mesh(UNIT_INTERVAL, 64)


class TestModular:
    def test_constant_integrand(self, mesh64):
        g = np.full(mesh64.n_cells, 2.0)
        assert modular(PowerPhi(2.0), mesh64, g) == pytest.approx(4.0)

    def test_power_margin(self, mesh64):
        g = np.full(mesh64.n_cells, 2.0)
        assert modular(PowerPhi(2.0), mesh64, g, power=0.5) == pytest.approx(8.0)

    def test_gradient_of_square_against_quadrature_oracle(self, mesh64):
        u = DiscreteField.from_function(mesh64, lambda p: p[:, 0] ** 2)
        g = np.linalg.norm(u.gradient(), axis=1)
        got = modular(PowerPhi(2.0), mesh64, g)
        # independent midpoint-rule oracle for int (2x)^2 dx over the cells
        mids = mesh64.centroids[:, 0]
        oracle = float(np.sum(mesh64.cell_measures * (2.0 * mids) ** 2))
        assert got == pytest.approx(oracle, rel=1e-13)
        # analytic limit 4/3; midpoint error is O(h^2)
        assert got == pytest.approx(4.0 / 3.0, abs=5.0 / 64 ** 2)

    def test_quadrature_refinement_improves(self):
        # smooth integrand: error shrinks by at least 1.5x per doubling
        errs = []
        for res in (16, 32, 64):
            mesh = build_mesh(UNIT_INTERVAL, res)
            u = DiscreteField.from_function(mesh, lambda p: np.sin(np.pi * p[:, 0]))
            vals = np.abs(u.centroid_values())
            errs.append(abs(modular(PowerPhi(2.0), mesh, vals) - 0.5))
        assert errs[0] / errs[1] >= 1.5
        assert errs[1] / errs[2] >= 1.5


class TestLuxemburg:
    def test_constant_two(self, mesh64):
        g = np.full(mesh64.n_cells, 2.0)
        assert luxemburg_norm(PowerPhi(2.0), mesh64, g) == pytest.approx(2.0, rel=1e-7)

    def test_zero_field(self, mesh64):
        assert luxemburg_norm(PowerPhi(2.0), mesh64, np.zeros(mesh64.n_cells)) == 0.0

    def test_double_phase_against_root_find_oracle(self, mesh64):
        phi = DoublePhasePhi(2.0, 4.0, constant_field(1.0))
        g = np.ones(mesh64.n_cells)
        lam = brentq(lambda t: 1.0 / t ** 2 + 1.0 / t ** 4 - 1.0, 1.0, 2.0)
        assert luxemburg_norm(phi, mesh64, g) == pytest.approx(lam, rel=1e-7)

    def test_unit_ball_property(self, mesh64):
        phi = DoublePhasePhi(2.0, 4.0, constant_field(1.0))
        u = DiscreteField.from_function(mesh64, lambda p: np.sin(2 * np.pi * p[:, 0]))
        _, g = field_magnitudes(u)
        lam = luxemburg_norm(phi, mesh64, g)
        assert modular(phi, mesh64, g / lam) == pytest.approx(1.0, abs=1e-6)


class TestSobolev:
    def test_identical_fields(self, mesh64):
        u = DiscreteField.from_function(mesh64, lambda p: p[:, 0])
        assert sobolev_distance(PowerPhi(2.0), u, u) == (0.0, 0.0)

    def test_unit_shift(self, mesh64):
        u = DiscreteField.constant(mesh64, 1.0)
        v = DiscreteField.constant(mesh64, 0.0)
        mod_gap, norm_gap = sobolev_distance(PowerPhi(2.0), u, v)
        assert mod_gap == pytest.approx(1.0, rel=1e-12)
        assert norm_gap == pytest.approx(1.0, rel=1e-6)

    def test_linear_gap_analytic(self, mesh64):
        u = DiscreteField.from_function(mesh64, lambda p: p[:, 0])
        v = DiscreteField.from_function(mesh64, lambda p: 2.0 * p[:, 0])
        mod_gap, _ = sobolev_distance(PowerPhi(2.0), u, v)
        # int x^2 + int 1 = 4/3 in the refinement limit
        assert mod_gap == pytest.approx(4.0 / 3.0, abs=5.0 / 64 ** 2)

    def test_mesh_mismatch(self):
        u = DiscreteField.constant(build_mesh(UNIT_INTERVAL, 4), 0.0)
        v = DiscreteField.constant(build_mesh(UNIT_INTERVAL, 8), 0.0)
        with pytest.raises(MeshMismatchError):
            sobolev_distance(PowerPhi(2.0), u, v)


class TestHolder:
    def test_linear_lipschitz_constant(self, mesh64):
        u = DiscreteField.from_function(mesh64, lambda p: p[:, 0])
        res = holder_seminorm(u, Compact((0.25,), (0.75,)), alpha=1.0)
        assert res.seminorm == pytest.approx(1.0, rel=1e-9)
        assert res.sup == pytest.approx(0.75)

    def test_constant_field(self, mesh64):
        u = DiscreteField.constant(mesh64, 5.0)
        res = holder_seminorm(u, Compact((0.25,), (0.75,)), alpha=0.5)
        assert res.seminorm == 0.0

    def test_sqrt_against_pair_enumeration_oracle(self, mesh64):
        u = DiscreteField.from_function(mesh64, lambda p: np.sqrt(p[:, 0]))
        res = holder_seminorm(u, Compact((0.25,), (0.75,)), alpha=0.5)
        nodes = mesh64.nodes[:, 0]
        keep = (nodes >= 0.25) & (nodes <= 0.75)
        xs, vs = nodes[keep], np.sqrt(nodes[keep])
        best = 0.0
        for i in range(xs.size):
            for j in range(i + 1, xs.size):
                best = max(best, abs(vs[i] - vs[j]) / abs(xs[i] - xs[j]) ** 0.5)
        assert res.seminorm == pytest.approx(best, rel=1e-12)

    def test_monotone_under_inclusion(self, mesh64):
        u = DiscreteField.from_function(mesh64, lambda p: np.sin(3 * p[:, 0]))
        inner = holder_seminorm(u, Compact((0.4,), (0.6,)), alpha=0.5)
        outer = holder_seminorm(u, Compact((0.25,), (0.75,)), alpha=0.5)
        assert inner.seminorm <= outer.seminorm + 1e-15

    def test_margin_enforced(self, mesh64):
        u = DiscreteField.from_function(mesh64, lambda p: p[:, 0])
        with pytest.raises(GeometryError):
            holder_seminorm(u, Compact((0.01,), (0.99,)), alpha=1.0)

    def test_distance_of_identical_fields(self, mesh64):
        u = DiscreteField.from_function(mesh64, lambda p: p[:, 0])
        assert holder_distance(u, u, Compact((0.25,), (0.75,)), alpha=0.5) == 0.0

    def test_compact_overlapping_lshape_notch_rejected(self):
        mesh = build_mesh(DomainSpec("lshape", (0.0, 1.0, 0.0, 1.0)), 8)
        u = DiscreteField.constant(mesh, 0.0)
        overlapping = Compact((0.25, 0.25), (0.75, 0.75))
        with pytest.raises(GeometryError):
            holder_seminorm(u, overlapping, alpha=0.5)

    def test_lshape_interior_compact_accepted(self):
        mesh = build_mesh(DomainSpec("lshape", (0.0, 1.0, 0.0, 1.0)), 16)
        u = DiscreteField.from_function(mesh, lambda p: p[:, 0] + p[:, 1])
        res = holder_seminorm(u, Compact((0.125, 0.125), (0.375, 0.375)),
                              alpha=1.0, min_margin=0.1)
        assert res.seminorm == pytest.approx(np.sqrt(2.0), rel=1e-9)
