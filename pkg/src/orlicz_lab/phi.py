"""Spatially-dependent growth functions phi(x, t) and their pointwise calculus.

A growth function maps (x, t) with x a domain point and t >= 0 to [0, inf),
is zero at t = 0 and non-decreasing in t.  The built-in families:

* ``PowerPhi``             scale * t^p
* ``VariableExponentPhi``  t^{p(x)}
* ``DoublePhasePhi``       t^p + a(x) t^q
* ``OrliczLogPhi``         t^p * log(e + t)
* ``PowerOfPhi``           phi(x,t)^{1+delta}
* ``SumPhi``               phi_1 + ... + phi_k
* ``WeightedPhi``          w(x) * phi(x,t)
* ``ConjugatePhi``         numerically evaluated Legendre conjugate

Every family declares power-growth exponents ``declared_p <= declared_q``
(the lower/upper almost-monotone envelope exponents) and a convexity flag.
Pointwise operations: evaluation, the right t-derivative for convex
families, the generalized inverse, and the convex conjugate.

Spatial samples are arrays of shape (m, dim); a bare scalar or a 1-D array
is treated as points on a 1-D domain.  The t arguments broadcast against
the m sampled points, so (k, m) or (k, 1) grids evaluate in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np

from .errors import BracketError, ConfigurationError, UnsupportedOperationError

# Finite sentinel for extended-real values; families with an upper
# power-growth bound stay far below it on any sensible grid.
PHI_VALUE_CAP = 1e300


def as_points(x) -> np.ndarray:
    """Normalize spatial samples to shape (m, dim)."""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        return pts.reshape(1, 1)
    if pts.ndim == 1:
        return pts.reshape(-1, 1)
    if pts.ndim == 2:
        return pts
    raise ConfigurationError(f"spatial samples must be (m, dim), got shape {pts.shape}")


@dataclass(frozen=True)
class CoefficientField:
    """A scalar coefficient over the domain with declared bounds.

    ``lower``/``upper`` are a priori bounds used to derive growth
    exponents; they are trusted for bookkeeping and spot-checked wherever
    the field is sampled.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    lower: float
    upper: float
    description: str = ""

    def __post_init__(self):
        if not np.isfinite(self.lower) or not np.isfinite(self.upper):
            raise ConfigurationError("coefficient bounds must be finite")
        if self.lower > self.upper:
            raise ConfigurationError("coefficient lower bound exceeds upper bound")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        vals = np.asarray(self.fn(as_points(points)), dtype=float)
        return vals

    def shifted(self, offset: float) -> "CoefficientField":
        base = self.fn
        return CoefficientField(
            lambda pts: np.asarray(base(pts), dtype=float) + offset,
            self.lower + offset,
            self.upper + offset,
            description=f"{self.description or 'field'}+{offset:g}",
        )


def constant_field(value: float, description: str = "") -> CoefficientField:
    v = float(value)
    return CoefficientField(lambda pts: np.full(pts.shape[0], v), v, v,
                            description or f"const {v:g}")


def _cap(values: np.ndarray) -> np.ndarray:
    return np.minimum(values, PHI_VALUE_CAP)


def _collapse(out: np.ndarray, t_in, n_points: int):
    """Scalar-in, scalar-out for single-point evaluations."""
    if np.ndim(t_in) == 0 and n_points == 1:
        return float(np.asarray(out).reshape(-1)[0])
    return out


class PhiFunction:
    """Base class; concrete families implement ``_eval`` and ``_rate``."""

    declared_p: float
    declared_q: float
    convex: bool

    def eval(self, x, t):
        """phi(x, t); t broadcasts against the m sampled points."""
        pts = as_points(x)
        tv = np.asarray(t, dtype=float)
        if np.any(tv < 0):
            raise ConfigurationError("phi is defined for t >= 0")
        with np.errstate(over="ignore"):
            out = self._eval(pts, tv)
        return _collapse(_cap(out), t, pts.shape[0])

    def rate(self, x, t):
        """Right derivative of t -> phi(x, t); convex families only."""
        if not self.convex:
            raise UnsupportedOperationError(
                f"{type(self).__name__} is not flagged convex; no derivative selection"
            )
        pts = as_points(x)
        tv = np.asarray(t, dtype=float)
        if np.any(tv < 0):
            raise ConfigurationError("rate is defined for t >= 0")
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            out = self._rate(pts, tv)
        return _collapse(_cap(out), t, pts.shape[0])

    def _eval(self, pts, t):  # pragma: no cover - abstract
        raise NotImplementedError

    def _rate(self, pts, t):  # pragma: no cover - abstract
        raise UnsupportedOperationError(f"{type(self).__name__} has no closed-form rate")


@dataclass(frozen=True)
class PowerPhi(PhiFunction):
    p: float
    scale: float = 1.0

    def __post_init__(self):
        if self.p < 1:
            raise ConfigurationError(f"power exponent must be >= 1, got {self.p}")
        if self.scale <= 0:
            raise ConfigurationError("scale must be positive")
        object.__setattr__(self, "declared_p", self.p)
        object.__setattr__(self, "declared_q", self.p)
        object.__setattr__(self, "convex", True)

    def _eval(self, pts, t):
        return self.scale * np.broadcast_to(t, np.broadcast_shapes(t.shape, (pts.shape[0],))) ** self.p

    def _rate(self, pts, t):
        tt = np.broadcast_to(t, np.broadcast_shapes(t.shape, (pts.shape[0],)))
        return self.scale * self.p * tt ** (self.p - 1.0)


@dataclass(frozen=True)
class VariableExponentPhi(PhiFunction):
    exponent: CoefficientField

    def __post_init__(self):
        if self.exponent.lower <= 1:
            raise ConfigurationError("variable exponent must stay above 1")
        object.__setattr__(self, "declared_p", self.exponent.lower)
        object.__setattr__(self, "declared_q", self.exponent.upper)
        object.__setattr__(self, "convex", True)

    def _exponent_at(self, pts):
        p = self.exponent(pts)
        if np.any(p < self.exponent.lower - 1e-12) or np.any(p > self.exponent.upper + 1e-12):
            raise ConfigurationError("exponent field leaves its declared bounds")
        return p

    def _eval(self, pts, t):
        return t ** self._exponent_at(pts)

    def _rate(self, pts, t):
        p = self._exponent_at(pts)
        return p * t ** (p - 1.0)


@dataclass(frozen=True)
class DoublePhasePhi(PhiFunction):
    p: float
    q: float
    weight: CoefficientField

    def __post_init__(self):
        if not 1 <= self.p <= self.q:
            raise ConfigurationError("double phase needs 1 <= p <= q")
        if self.weight.lower < 0:
            raise ConfigurationError("double-phase weight must be non-negative")
        object.__setattr__(self, "declared_p", self.p)
        object.__setattr__(self, "declared_q", self.q if self.weight.upper > 0 else self.p)
        object.__setattr__(self, "convex", True)

    def _weight_at(self, pts):
        a = self.weight(pts)
        if np.any(a < 0):
            raise ConfigurationError("sampled double-phase weight is negative")
        return a

    def _eval(self, pts, t):
        a = self._weight_at(pts)
        return t ** self.p + a * t ** self.q

    def _rate(self, pts, t):
        a = self._weight_at(pts)
        return self.p * t ** (self.p - 1.0) + a * self.q * t ** (self.q - 1.0)


@dataclass(frozen=True)
class OrliczLogPhi(PhiFunction):
    p: float

    def __post_init__(self):
        if self.p < 1:
            raise ConfigurationError(f"log-perturbed power needs p >= 1, got {self.p}")
        object.__setattr__(self, "declared_p", self.p)
        # log(e+t)/t is decreasing, so t^p log(e+t) / t^{p+1} decreases exactly.
        object.__setattr__(self, "declared_q", self.p + 1.0)
        object.__setattr__(self, "convex", True)

    def _eval(self, pts, t):
        tt = np.broadcast_to(t, np.broadcast_shapes(t.shape, (pts.shape[0],)))
        return tt ** self.p * np.log(np.e + tt)

    def _rate(self, pts, t):
        tt = np.broadcast_to(t, np.broadcast_shapes(t.shape, (pts.shape[0],)))
        return self.p * tt ** (self.p - 1.0) * np.log(np.e + tt) + tt ** self.p / (np.e + tt)


@dataclass(frozen=True)
class PowerOfPhi(PhiFunction):
    base: PhiFunction
    delta: float

    def __post_init__(self):
        if self.delta < 0:
            raise ConfigurationError("power margin delta must be >= 0")
        object.__setattr__(self, "declared_p", self.base.declared_p * (1.0 + self.delta))
        object.__setattr__(self, "declared_q", self.base.declared_q * (1.0 + self.delta))
        object.__setattr__(self, "convex", self.base.convex)

    def _eval(self, pts, t):
        return self.base._eval(pts, t) ** (1.0 + self.delta)

    def _rate(self, pts, t):
        b = self.base._eval(pts, t)
        return (1.0 + self.delta) * b ** self.delta * self.base._rate(pts, t)


@dataclass(frozen=True)
class SumPhi(PhiFunction):
    parts: Tuple[PhiFunction, ...]

    def __post_init__(self):
        if len(self.parts) == 0:
            raise ConfigurationError("sum of growth functions needs at least one part")
        object.__setattr__(self, "declared_p", min(p.declared_p for p in self.parts))
        object.__setattr__(self, "declared_q", max(p.declared_q for p in self.parts))
        object.__setattr__(self, "convex", all(p.convex for p in self.parts))

    def _eval(self, pts, t):
        out = self.parts[0]._eval(pts, t)
        for part in self.parts[1:]:
            out = out + part._eval(pts, t)
        return out

    def _rate(self, pts, t):
        out = self.parts[0]._rate(pts, t)
        for part in self.parts[1:]:
            out = out + part._rate(pts, t)
        return out


@dataclass(frozen=True)
class WeightedPhi(PhiFunction):
    base: PhiFunction
    weight: CoefficientField

    def __post_init__(self):
        if self.weight.lower <= 0:
            raise ConfigurationError("spatial weight must be bounded below by a positive constant")
        object.__setattr__(self, "declared_p", self.base.declared_p)
        object.__setattr__(self, "declared_q", self.base.declared_q)
        object.__setattr__(self, "convex", self.base.convex)

    def _weight_at(self, pts):
        w = self.weight(pts)
        if np.any(w <= 0):
            raise ConfigurationError("sampled spatial weight is not positive")
        return w

    def _eval(self, pts, t):
        return self._weight_at(pts) * self.base._eval(pts, t)

    def _rate(self, pts, t):
        return self._weight_at(pts) * self.base._rate(pts, t)


@dataclass(frozen=True)
class ConjugatePhi(PhiFunction):
    """The conjugate as a first-class growth function (evaluated numerically)."""

    base: PhiFunction
    tol: float = 1e-10

    def __post_init__(self):
        if self.base.declared_p <= 1:
            raise ConfigurationError("conjugate family needs a base with declared_p > 1")
        p, q = self.base.declared_p, self.base.declared_q
        object.__setattr__(self, "declared_p", q / (q - 1.0))
        object.__setattr__(self, "declared_q", p / (p - 1.0))
        object.__setattr__(self, "convex", True)

    def _eval(self, pts, t):
        return conjugate_eval(self.base, pts, t, tol=self.tol)


def eval_phi(phi: PhiFunction, x, t):
    return phi.eval(x, t)


def eval_growth_rate(phi: PhiFunction, x, t):
    """Right derivative of t -> phi(x,t) at t > 0 (subdifferential selection)."""
    return phi.rate(x, t)


def inverse(phi: PhiFunction, x, tau, tol: float = 1e-10):
    """Generalized inverse inf{t >= 0 : phi(x,t) >= tau} by monotone bisection.

    Returns the infimum selection (left-continuous on flat pieces) to
    absolute tolerance ``tol``.
    """
    pts = as_points(x)
    tau_arr = np.asarray(tau, dtype=float)
    shape = np.broadcast_shapes(tau_arr.shape, (pts.shape[0],))
    tau_b = np.broadcast_to(tau_arr, shape)
    if np.any(tau_b < 0):
        raise ConfigurationError("inverse is defined for tau >= 0")

    hi = np.ones(shape)
    pending = phi.eval(pts, hi) < tau_b
    for _ in range(1100):
        if not pending.any():
            break
        hi = np.where(pending, hi * 2.0, hi)
        if np.any(hi > 1e150):
            raise BracketError(
                "tau exceeds the reachable range of phi within the search bracket",
                bracket=(0.0, 1e150),
            )
        pending = phi.eval(pts, hi) < tau_b
    lo = np.zeros(shape)
    # ~60 halvings push the bracket width below tol for hi ~ O(1..1e3).
    n_iter = int(np.ceil(np.log2(max(float(np.max(hi)), 1.0) / tol))) + 2
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        above = phi.eval(pts, mid) >= tau_b
        hi = np.where(above, mid, hi)
        lo = np.where(above, lo, mid)
    out = np.where(tau_b == 0.0, 0.0, hi)
    return _collapse(out, tau, pts.shape[0])


_INV_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def conjugate_eval(phi: PhiFunction, x, s, tol: float = 1e-10):
    """Convex conjugate sup_{t>0} { s t - phi(x,t) } by bracketed maximization.

    The bracket [0, T] is grown geometrically until phi(x,T) >= s T; for a
    convex phi the objective is concave with value 0 at both bracket ends,
    so the sup lies inside.  A coarse log-spaced scan localizes the
    maximizer (guarding the merely-weak families), then golden-section
    refines it.  Raises ``BracketError`` when s outruns the declared
    growth (e.g. the conjugate of a linear function past its slope).
    """
    pts = as_points(x)
    s_arr = np.asarray(s, dtype=float)
    shape = np.broadcast_shapes(s_arr.shape, (pts.shape[0],))
    s_b = np.broadcast_to(s_arr, shape).astype(float)
    if np.any(s_b < 0):
        raise ConfigurationError("conjugate is evaluated at s >= 0")

    hi = np.ones(shape)
    pending = phi.eval(pts, hi) < s_b * hi
    for _ in range(520):
        if not pending.any():
            break
        hi = np.where(pending, hi * 2.0, hi)
        if np.any(hi[pending] > 1e120):
            raise BracketError(
                "conjugate bracket exhausted: s grows at least as fast as phi",
                bracket=(0.0, float(np.max(hi))),
            )
        pending = phi.eval(pts, hi) < s_b * hi
    if pending.any():
        raise BracketError(
            "conjugate bracket exhausted: s grows at least as fast as phi",
            bracket=(0.0, float(np.max(hi))),
        )

    def objective(t):
        return s_b * t - phi.eval(pts, t)

    # Coarse localization over a log grid spanning twelve decades below T.
    factors = np.geomspace(1e-12, 1.0, 48)
    best_val = np.zeros(shape)  # objective at t=0
    best_t = np.zeros(shape)
    lo_t = np.zeros(shape)
    hi_t = hi.copy()
    prev = np.zeros(shape)
    for k, f in enumerate(factors):
        cand = hi * f
        val = objective(cand)
        better = val > best_val
        lo_t = np.where(better, prev, lo_t)
        best_val = np.where(better, val, best_val)
        best_t = np.where(better, cand, best_t)
        upper = hi * factors[k + 1] if k + 1 < len(factors) else hi
        hi_t = np.where(better, upper, hi_t)
        prev = cand

    a, b = lo_t, hi_t
    c = b - _INV_GOLDEN * (b - a)
    d = a + _INV_GOLDEN * (b - a)
    fc, fd = objective(c), objective(d)
    for _ in range(70):
        take_left = fc >= fd
        b = np.where(take_left, d, b)
        a = np.where(take_left, a, c)
        c = b - _INV_GOLDEN * (b - a)
        d = a + _INV_GOLDEN * (b - a)
        fc, fd = objective(c), objective(d)
        if float(np.max(b - a)) < tol * max(1.0, float(np.max(np.abs(b)))):
            break
    refined = np.maximum(fc, fd)
    out = np.maximum(best_val, refined)
    out = np.where(s_b == 0.0, 0.0, np.maximum(out, 0.0))
    return _collapse(out, s, pts.shape[0])


def conjugate_function(phi: PhiFunction, tol: float = 1e-10) -> ConjugatePhi:
    return ConjugatePhi(phi, tol=tol)
