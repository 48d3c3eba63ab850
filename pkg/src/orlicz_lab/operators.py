"""Differential operators A(x, xi) built from growth functions.

The canonical operator of a convex growth function is
A(x, xi) = d/dt phi(x, |xi|) * xi / |xi|, the phi-Laplacian flux.  It is
the gradient in xi of xi -> phi(x, |xi|), so the obstacle problem for it
is an exact convex minimization.  Perturbation laws produce operator
sequences converging locally uniformly back to their base.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .conditions import SamplingPlan
from .errors import ConfigurationError, DegenerateComparisonError, UnsupportedOperationError
from .phi import (
    CoefficientField,
    DoublePhasePhi,
    PhiFunction,
    PowerPhi,
    VariableExponentPhi,
    WeightedPhi,
    as_points,
    constant_field,
)

# |xi| floor used only inside the direction factor xi/|xi|
EPS_GRAD = 1e-12


@dataclass(frozen=True)
class OperatorHandle:
    """A Caratheodory map (x, xi) -> R^dim with certified growth control.

    ``phi`` is the growth function the structure conditions are measured
    against; ``energy_phi`` is the density whose xi-gradient the map is,
    or None when the map is not a gradient.
    """

    phi: PhiFunction
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    energy_phi: Optional[PhiFunction] = None
    label: str = "operator"
    perturbation: dict = field(default_factory=dict)

    def __call__(self, x: np.ndarray, xi: np.ndarray) -> np.ndarray:
        pts = as_points(x)
        xi_arr = np.atleast_2d(np.asarray(xi, dtype=float))
        out = self.evaluate(pts, xi_arr)
        return out

    @property
    def is_gradient(self) -> bool:
        return self.energy_phi is not None


def _flux(phi: PhiFunction, pts: np.ndarray, xi: np.ndarray) -> np.ndarray:
    mag = np.linalg.norm(xi, axis=-1)
    rate = np.asarray(phi.rate(pts, mag), dtype=float).reshape(mag.shape)
    factor = np.where(mag > 0.0, rate / np.maximum(mag, EPS_GRAD), 0.0)
    return factor[..., None] * xi


def canonical_operator(phi: PhiFunction) -> OperatorHandle:
    """The phi-Laplacian flux; zero at xi = 0."""
    if not phi.convex:
        raise UnsupportedOperationError("canonical operator needs a convex phi")
    return OperatorHandle(
        phi=phi,
        evaluate=lambda pts, xi: _flux(phi, pts, xi),
        energy_phi=phi,
        label="canonical",
    )


@dataclass(frozen=True)
class PerturbationLaw:
    """Named perturbation with magnitude 2^{-i} at index i.

    kinds: ``exponent`` (p -> p + 2^{-i}), ``coefficient``
    (a -> a + 2^{-i} on the double-phase weight), ``multiplier``
    (A -> (1 + 2^{-i} m(x)) A with |m| <= 1), ``none``.
    """

    kind: str
    m: Optional[CoefficientField] = None

    def __post_init__(self):
        if self.kind not in ("exponent", "coefficient", "multiplier", "none"):
            raise ConfigurationError(f"unknown perturbation law {self.kind!r}")
        if self.kind == "multiplier":
            m = self.m if self.m is not None else constant_field(1.0)
            if max(abs(m.lower), abs(m.upper)) > 1.0 + 1e-12:
                raise ConfigurationError("multiplier profile must satisfy |m| <= 1")
            object.__setattr__(self, "m", m)

    def epsilon(self, index: int) -> float:
        if index < 1:
            raise ConfigurationError("perturbation index starts at 1")
        return 2.0 ** (-index)


def perturbed_phi(phi: PhiFunction, law: PerturbationLaw, index: int) -> PhiFunction:
    """The growth function of the index-th perturbed problem."""
    eps = law.epsilon(index)
    if law.kind == "none":
        return phi
    if law.kind == "exponent":
        if isinstance(phi, PowerPhi):
            return PowerPhi(phi.p + eps, scale=phi.scale)
        if isinstance(phi, VariableExponentPhi):
            return VariableExponentPhi(phi.exponent.shifted(eps))
        raise ConfigurationError(
            f"exponent law applies to power families, not {type(phi).__name__}")
    if law.kind == "coefficient":
        if isinstance(phi, DoublePhasePhi):
            return DoublePhasePhi(phi.p, phi.q, phi.weight.shifted(eps))
        raise ConfigurationError(
            f"coefficient law applies to double-phase, not {type(phi).__name__}")
    # multiplier: the growth function of the sequence is unchanged; only
    # the operator (and its energy density) picks up the factor
    return phi


def perturbed_operator(base: OperatorHandle, index: int,
                       law: PerturbationLaw) -> OperatorHandle:
    eps = law.epsilon(index)
    if law.kind == "none":
        return base
    if law.kind in ("exponent", "coefficient"):
        phi_i = perturbed_phi(base.phi, law, index)
        op = canonical_operator(phi_i)
        return OperatorHandle(
            phi=phi_i, evaluate=op.evaluate, energy_phi=phi_i,
            label=f"{law.kind}[{index}]",
            perturbation={"kind": law.kind, "index": index, "epsilon": eps},
        )
    m = law.m
    if base.energy_phi is None:
        raise ConfigurationError("multiplier law needs a gradient-type base")
    weight = CoefficientField(
        lambda pts, m=m, eps=eps: 1.0 + eps * m(pts),
        1.0 + eps * min(0.0, m.lower),
        1.0 + eps * max(0.0, m.upper),
        description=f"1+{eps:g}*m",
    )
    energy_phi = WeightedPhi(base.energy_phi, weight)
    base_eval = base.evaluate

    def evaluate(pts, xi):
        return (1.0 + eps * m(pts))[..., None] * base_eval(pts, xi)

    return OperatorHandle(
        phi=base.phi, evaluate=evaluate, energy_phi=energy_phi,
        label=f"multiplier[{index}]",
        perturbation={"kind": "multiplier", "index": index, "epsilon": eps},
    )


@dataclass(frozen=True)
class StructureCertificate:
    """Measured coercivity, growth, and monotonicity of an operator."""

    c1: float
    c2: float
    monotonicity_margin: float
    passed: bool
    samples: dict
    worst: dict = field(default_factory=dict)


def sample_directions(dim: int, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if dim == 1:
        signs = np.where(np.arange(count) % 2 == 0, 1.0, -1.0)
        return signs.reshape(-1, 1)
    raw = rng.normal(size=(count, dim))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def certify_structure(op: OperatorHandle, phi: PhiFunction, plan: SamplingPlan,
                      n_directions: int = 16, seed: int = 0) -> StructureCertificate:
    """Measure c1 = min A.xi/phi, c2 = max |A||xi|/phi, and the pairwise
    monotonicity margin over sampled directions x magnitudes."""
    pts = plan.points
    dim = plan.dimension
    dirs = sample_directions(dim, n_directions, seed)
    t = plan.t_grid
    c1 = np.inf
    c2 = 0.0
    worst = {}
    for d in dirs:
        xi = t[:, None, None] * d[None, None, :]          # (T, 1, dim)
        xi = np.broadcast_to(xi, (t.size, pts.shape[0], dim))
        flat_pts = np.repeat(pts[None, :, :], t.size, axis=0).reshape(-1, dim)
        a = op(flat_pts, xi.reshape(-1, dim)).reshape(t.size, pts.shape[0], dim)
        denom = phi.eval(pts, t[:, None])
        if np.any(denom <= 0.0):
            raise DegenerateComparisonError("phi vanishes at a nonzero sample")
        dot = np.einsum("tmd,tmd->tm", a, xi)
        mag = np.linalg.norm(a, axis=-1)
        r1 = dot / denom
        r2 = mag * t[:, None] / denom
        i1 = np.unravel_index(int(np.argmin(r1)), r1.shape)
        if float(r1[i1]) < c1:
            c1 = float(r1[i1])
            worst = {"x": pts[i1[1]].tolist(), "t": float(t[i1[0]]),
                     "direction": d.tolist()}
        c2 = max(c2, float(np.max(r2)))

    rng = np.random.default_rng(seed + 1)
    margin = np.inf
    n_pairs = min(plan.pair_count, 256)
    for _ in range(n_pairs):
        x = pts[rng.integers(pts.shape[0])][None, :]
        xi = rng.normal(size=(1, dim)) * rng.choice(t)
        eta = rng.normal(size=(1, dim)) * rng.choice(t)
        if np.allclose(xi, eta):
            continue
        diff = op(x, xi) - op(x, eta)
        step = xi - eta
        margin = min(margin, float(np.sum(diff * step) / np.sum(step * step)))
    passed = c1 > 0.0 and np.isfinite(c2) and margin > 0.0
    return StructureCertificate(
        c1=c1, c2=c2, monotonicity_margin=margin, passed=bool(passed),
        samples={**plan.description(), "n_directions": n_directions, "seed": seed},
        worst=worst,
    )


def convergence_gap(op_i: OperatorHandle, op: OperatorHandle,
                    compact_points: np.ndarray, t_cap: float,
                    plan: SamplingPlan, n_directions: int = 16,
                    seed: int = 0) -> float:
    """sup |A_i - A| over the compact for |xi| <= t_cap."""
    if not np.isfinite(t_cap) or t_cap <= 0:
        raise ConfigurationError("t_cap must be finite and positive")
    pts = as_points(compact_points)
    dim = pts.shape[1]
    mags = plan.t_grid[plan.t_grid <= t_cap]
    mags = np.unique(np.concatenate([mags, [t_cap]]))
    dirs = sample_directions(dim, n_directions, seed)
    gap = 0.0
    for d in dirs:
        xi = mags[:, None, None] * d[None, None, :]
        xi = np.broadcast_to(xi, (mags.size, pts.shape[0], dim)).reshape(-1, dim)
        flat_pts = np.repeat(pts[None, :, :], mags.size, axis=0).reshape(-1, dim)
        diff = op_i(flat_pts, xi) - op(flat_pts, xi)
        gap = max(gap, float(np.max(np.linalg.norm(diff, axis=-1))))
    return gap
