"""Domains, conforming meshes, and piecewise-linear discrete fields.

Shipped geometries: an interval, an axis-aligned rectangle, and the
L-shaped polygon (rectangle minus its upper-right quadrant).  All carry
explicit measure-density constants as metadata, spot-checkable by Monte
Carlo ball sampling.  Meshes are structured (segments / right-triangle
pairs) with deterministic node ordering; fields are nodal values with a
cellwise-constant gradient.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np

from .errors import ConfigurationError, MeshMismatchError


@dataclass(frozen=True)
class DomainSpec:
    """A bounded domain with measure-density metadata.

    ``bounds`` is (a, b) for an interval and (ax, bx, ay, by) for the 2-d
    geometries; the L-shape removes the upper-right quadrant
    [mid_x, bx] x [mid_y, by].
    """

    geometry: str
    bounds: Tuple[float, ...]

    def __post_init__(self):
        if self.geometry not in ("interval", "rectangle", "lshape"):
            raise ConfigurationError(f"unsupported geometry {self.geometry!r}")
        b = tuple(float(v) for v in self.bounds)
        object.__setattr__(self, "bounds", b)
        if self.geometry == "interval":
            if len(b) != 2 or b[0] >= b[1]:
                raise ConfigurationError("interval bounds must be (a, b) with a < b")
        else:
            if len(b) != 4 or b[0] >= b[1] or b[2] >= b[3]:
                raise ConfigurationError("rectangle bounds must be (ax, bx, ay, by)")

    @property
    def dimension(self) -> int:
        return 1 if self.geometry == "interval" else 2

    @property
    def measure(self) -> float:
        if self.geometry == "interval":
            a, b = self.bounds
            return b - a
        ax, bx, ay, by = self.bounds
        area = (bx - ax) * (by - ay)
        return 0.75 * area if self.geometry == "lshape" else area

    @property
    def measure_density(self) -> Tuple[float, float]:
        """(c, r0): exterior mass fraction of balls at boundary points.

        Interval and rectangle boundaries are locally flat or convex, so
        half of every small ball lies outside; the L-shape's reentrant
        corner leaves only a quarter.
        """
        if self.geometry == "interval":
            a, b = self.bounds
            return 0.5, (b - a) / 2.0
        ax, bx, ay, by = self.bounds
        r0 = min(bx - ax, by - ay) / 2.0
        if self.geometry == "rectangle":
            return 0.5, r0
        return 0.25, r0 / 2.0

    def _notch(self):
        ax, bx, ay, by = self.bounds
        return (ax + bx) / 2.0, (ay + by) / 2.0

    def contains(self, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
        """Mask of points inside the open domain (within -tol of the boundary)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.geometry == "interval":
            a, b = self.bounds
            x = pts[:, 0]
            return (x > a + tol) & (x < b - tol)
        ax, bx, ay, by = self.bounds
        x, y = pts[:, 0], pts[:, 1]
        inside = (x > ax + tol) & (x < bx - tol) & (y > ay + tol) & (y < by - tol)
        if self.geometry == "lshape":
            mx, my = self._notch()
            inside &= ~((x >= mx - tol) & (y >= my - tol))
        return inside

    def boundary_segments(self) -> np.ndarray:
        """Boundary edges as (k, 2, dim) arrays; endpoints for the interval."""
        if self.geometry == "interval":
            a, b = self.bounds
            return np.array([[[a], [a]], [[b], [b]]])
        ax, bx, ay, by = self.bounds
        if self.geometry == "rectangle":
            corners = [(ax, ay), (bx, ay), (bx, by), (ax, by)]
        else:
            mx, my = self._notch()
            corners = [(ax, ay), (bx, ay), (bx, my), (mx, my), (mx, by), (ax, by)]
        segs = []
        for k in range(len(corners)):
            segs.append([corners[k], corners[(k + 1) % len(corners)]])
        return np.asarray(segs, dtype=float)

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        """Exact distance to the boundary, per geometry."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.geometry == "interval":
            a, b = self.bounds
            return np.minimum(pts[:, 0] - a, b - pts[:, 0])
        best = np.full(pts.shape[0], np.inf)
        for seg in self.boundary_segments():
            best = np.minimum(best, _segment_distance(pts, seg[0], seg[1]))
        return best

    def sample_boundary(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.geometry == "interval":
            a, b = self.bounds
            return np.where(rng.random((n, 1)) < 0.5, a, b)
        segs = self.boundary_segments()
        lengths = np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1)
        which = rng.choice(len(segs), size=n, p=lengths / lengths.sum())
        lam = rng.random((n, 1))
        return segs[which, 0] + lam * (segs[which, 1] - segs[which, 0])


def _segment_distance(pts: np.ndarray, a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    d = np.asarray(b, dtype=float) - a
    denom = float(d @ d)
    if denom == 0.0:
        return np.linalg.norm(pts - a, axis=1)
    lam = np.clip((pts - a) @ d / denom, 0.0, 1.0)
    proj = a + lam[:, None] * d
    return np.linalg.norm(pts - proj, axis=1)


def spot_check_measure_density(domain: DomainSpec, radii, n_boundary: int = 2000,
                               n_per_ball: int = 2000, seed: int = 0,
                               slack: float = 0.08) -> dict:
    """Monte Carlo check of the shipped (c, r0) constants.

    For sampled boundary points z and radii r <= r0, estimates
    |B(z,r) n complement| / |B(z,r)| and compares against c minus a
    sampling slack.  Returns the worst estimate per radius.
    """
    c, r0 = domain.measure_density
    rng = np.random.default_rng(seed)
    z = domain.sample_boundary(n_boundary, rng)
    out = {"c": c, "r0": r0, "worst": {}, "passed": True}
    for r in radii:
        if r > r0:
            raise ConfigurationError(f"radius {r:g} exceeds r0 = {r0:g}")
        if domain.dimension == 1:
            offs = rng.uniform(-r, r, size=(n_per_ball, 1))
        else:
            ang = rng.uniform(0.0, 2 * np.pi, size=n_per_ball)
            rad = r * np.sqrt(rng.random(n_per_ball))
            offs = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        # (nz, ns, dim) -> fraction outside per boundary point
        probe = z[:, None, :] + offs[None, :, :]
        outside = ~domain.contains(probe.reshape(-1, domain.dimension))
        frac = outside.reshape(n_boundary, n_per_ball).mean(axis=1)
        worst = float(frac.min())
        out["worst"][float(r)] = worst
        if worst < c - slack:
            out["passed"] = False
    return out


@dataclass(frozen=True)
class Mesh:
    """Conforming simplicial mesh with precomputed P1 machinery."""

    domain: DomainSpec
    nodes: np.ndarray          # (N, dim)
    cells: np.ndarray          # (M, dim+1) int
    boundary_mask: np.ndarray  # (N,) bool
    resolution: int

    def __post_init__(self):
        measures, centroids, grads = _cell_geometry(self.nodes, self.cells)
        if np.any(measures <= 0):
            raise ConfigurationError("mesh has non-positive cell measures")
        total = float(measures.sum())
        if abs(total - self.domain.measure) > 1e-12 * max(1.0, self.domain.measure):
            raise ConfigurationError(
                f"cell measures sum to {total!r}, expected {self.domain.measure!r}"
            )
        object.__setattr__(self, "cell_measures", measures)
        object.__setattr__(self, "centroids", centroids)
        object.__setattr__(self, "basis_gradients", grads)
        object.__setattr__(self, "h_mesh", float(np.max(measures) ** (1.0 / self.dimension)))

    @property
    def dimension(self) -> int:
        return self.nodes.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_cells(self) -> int:
        return self.cells.shape[0]

    def interior_nodes(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)


def _cell_geometry(nodes, cells):
    dim = nodes.shape[1]
    verts = nodes[cells]  # (M, dim+1, dim)
    if dim == 1:
        h = verts[:, 1, 0] - verts[:, 0, 0]
        measures = np.abs(h)
        centroids = verts.mean(axis=1)
        grads = np.stack([-1.0 / h, 1.0 / h], axis=1)[:, :, None]
        return measures, centroids, grads
    e1 = verts[:, 1] - verts[:, 0]
    e2 = verts[:, 2] - verts[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    measures = 0.5 * np.abs(det)
    centroids = verts.mean(axis=1)
    # gradients of barycentric coordinates
    g1 = np.stack([e2[:, 1], -e2[:, 0]], axis=1) / det[:, None]
    g2 = np.stack([-e1[:, 1], e1[:, 0]], axis=1) / det[:, None]
    g0 = -(g1 + g2)
    grads = np.stack([g0, g1, g2], axis=1)
    return measures, centroids, grads


def build_mesh(domain: DomainSpec, resolution: int) -> Mesh:
    """Uniform conforming mesh with O(1/resolution) cell size.

    1-d: ``resolution`` segments.  2-d: ``resolution`` squares per side,
    each split into two triangles; the L-shape needs an even resolution so
    the notch lies on grid lines.
    """
    if resolution < 2:
        raise ConfigurationError("resolution must be at least 2")
    if domain.geometry == "interval":
        a, b = domain.bounds
        nodes = np.linspace(a, b, resolution + 1).reshape(-1, 1)
        cells = np.column_stack([np.arange(resolution), np.arange(1, resolution + 1)])
        boundary = np.zeros(resolution + 1, dtype=bool)
        boundary[[0, -1]] = True
        return Mesh(domain, nodes, cells, boundary, resolution)

    if domain.geometry == "lshape" and resolution % 2 != 0:
        raise ConfigurationError("L-shape meshes need an even resolution")
    ax, bx, ay, by = domain.bounds
    n = resolution
    gx = np.linspace(ax, bx, n + 1)
    gy = np.linspace(ay, by, n + 1)
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    all_nodes = np.column_stack([xx.ravel(), yy.ravel()])

    def node_id(i, j):
        return i * (n + 1) + j

    squares = []
    for i in range(n):
        for j in range(n):
            cx = 0.5 * (gx[i] + gx[i + 1])
            cy = 0.5 * (gy[j] + gy[j + 1])
            if domain.geometry == "lshape":
                mx, my = domain._notch()
                if cx > mx and cy > my:
                    continue
            squares.append((i, j))
    tris = []
    for i, j in squares:
        v00, v10 = node_id(i, j), node_id(i + 1, j)
        v01, v11 = node_id(i, j + 1), node_id(i + 1, j + 1)
        tris.append((v00, v10, v11))
        tris.append((v00, v11, v01))
    tris = np.asarray(tris, dtype=int)
    used = np.unique(tris)
    remap = -np.ones(all_nodes.shape[0], dtype=int)
    remap[used] = np.arange(used.size)
    nodes = all_nodes[used]
    cells = remap[tris]

    eps = 1e-12 * max(bx - ax, by - ay)
    x, y = nodes[:, 0], nodes[:, 1]
    boundary = (np.abs(x - ax) < eps) | (np.abs(x - bx) < eps) | \
               (np.abs(y - ay) < eps) | (np.abs(y - by) < eps)
    if domain.geometry == "lshape":
        mx, my = domain._notch()
        boundary |= (np.abs(x - mx) < eps) & (y >= my - eps)
        boundary |= (np.abs(y - my) < eps) & (x >= mx - eps)
    return Mesh(domain, nodes, cells, boundary, resolution)


@dataclass(frozen=True)
class DiscreteField:
    """Nodal values with a piecewise-linear interpretation."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.mesh.n_nodes,):
            raise ConfigurationError(
                f"field has {vals.shape} values for {self.mesh.n_nodes} nodes"
            )
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("field values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, mesh: Mesh, fn: Callable[[np.ndarray], np.ndarray]):
        return cls(mesh, np.asarray(fn(mesh.nodes), dtype=float))

    @classmethod
    def constant(cls, mesh: Mesh, value: float):
        return cls(mesh, np.full(mesh.n_nodes, float(value)))

    def gradient(self) -> np.ndarray:
        """Exact gradient of the P1 interpolant, one vector per cell."""
        return np.einsum("mkd,mk->md", self.mesh.basis_gradients,
                         self.values[self.mesh.cells])

    def centroid_values(self) -> np.ndarray:
        return self.values[self.mesh.cells].mean(axis=1)

    def __sub__(self, other: "DiscreteField") -> "DiscreteField":
        require_same_mesh(self, other)
        return DiscreteField(self.mesh, self.values - other.values)

    def __add__(self, other: "DiscreteField") -> "DiscreteField":
        require_same_mesh(self, other)
        return DiscreteField(self.mesh, self.values + other.values)


def require_same_mesh(*fields: DiscreteField) -> Mesh:
    mesh = fields[0].mesh
    for f in fields[1:]:
        if f.mesh is not mesh:
            same = (f.mesh.nodes.shape == mesh.nodes.shape
                    and np.array_equal(f.mesh.nodes, mesh.nodes)
                    and np.array_equal(f.mesh.cells, mesh.cells))
            if not same:
                raise MeshMismatchError("fields live on different meshes")
    return mesh


def gradient(u: DiscreteField) -> np.ndarray:
    return u.gradient()


def write_field(u: DiscreteField, stream) -> None:
    """Flat text dump: node table, cell table, value table."""
    mesh = u.mesh
    stream.write(f"# geometry {mesh.domain.geometry} resolution {mesh.resolution}\n")
    stream.write(f"# bounds {' '.join(f'{b:.17g}' for b in mesh.domain.bounds)}\n")
    stream.write(f"nodes {mesh.n_nodes} {mesh.dimension}\n")
    for row in mesh.nodes:
        stream.write(" ".join(f"{v:.17g}" for v in row) + "\n")
    stream.write(f"cells {mesh.n_cells} {mesh.cells.shape[1]}\n")
    for row in mesh.cells:
        stream.write(" ".join(str(v) for v in row) + "\n")
    stream.write(f"values {mesh.n_nodes}\n")
    for v in u.values:
        stream.write(f"{v:.17g}\n")


def read_field(stream) -> DiscreteField:
    header = stream.readline().split()
    geometry = header[2]
    resolution = int(header[4])
    bounds = tuple(float(v) for v in stream.readline().split()[2:])
    domain = DomainSpec(geometry, bounds)
    n, dim = (int(v) for v in stream.readline().split()[1:])
    nodes = np.array([[float(v) for v in stream.readline().split()] for _ in range(n)])
    m, k = (int(v) for v in stream.readline().split()[1:])
    cells = np.array([[int(v) for v in stream.readline().split()] for _ in range(m)],
                     dtype=int)
    nv = int(stream.readline().split()[1])
    values = np.array([float(stream.readline()) for _ in range(nv)])
    ref = build_mesh(domain, resolution)
    if not (np.array_equal(ref.nodes, nodes) and np.array_equal(ref.cells, cells)):
        raise ConfigurationError("serialized mesh does not match its declared geometry")
    return DiscreteField(ref, values)


def field_to_text(u: DiscreteField) -> str:
    buf = io.StringIO()
    write_field(u, buf)
    return buf.getvalue()


def field_from_text(text: str) -> DiscreteField:
    return read_field(io.StringIO(text))
