"""Sampled certification of the structural conditions on growth functions.

The conditions quantify over almost-every x and all t; certification here
is grid-based and falsifiable: every certificate records the grid it was
measured on, the measured constant, and the worst sampled violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    DegenerateComparisonError,
    WitnessInvalidError,
)
from .phi import (
    ConjugatePhi,
    DoublePhasePhi,
    OrliczLogPhi,
    PhiFunction,
    PowerOfPhi,
    PowerPhi,
    SumPhi,
    VariableExponentPhi,
    WeightedPhi,
    as_points,
    conjugate_eval,
    constant_field,
    inverse,
)


@dataclass(frozen=True)
class SamplingPlan:
    """Spatial samples, a log-spaced t-grid, and a pair budget."""

    points: np.ndarray
    t_grid: np.ndarray
    pair_count: int = 256
    seed: int = 0

    def __post_init__(self):
        pts = as_points(self.points)
        object.__setattr__(self, "points", pts)
        t = np.asarray(self.t_grid, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ConfigurationError("t-grid must be a non-empty 1-d array")
        if t[0] <= 0 or np.any(np.diff(t) <= 0):
            raise ConfigurationError("t-grid must be strictly increasing with t_min > 0")
        object.__setattr__(self, "t_grid", t)
        if self.pair_count < 1:
            raise ConfigurationError("pair budget must be positive")

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def description(self) -> dict:
        return {
            "n_spatial": int(self.points.shape[0]),
            "t_min": float(self.t_grid[0]),
            "t_max": float(self.t_grid[-1]),
            "t_count": int(self.t_grid.size),
            "pair_count": int(self.pair_count),
            "seed": int(self.seed),
        }


def log_t_grid(t_min: float = 1e-3, t_max: float = 1e3, count: int = 32) -> np.ndarray:
    return np.geomspace(t_min, t_max, count)


def plan_for_interval(a: float, b: float, n_spatial: int = 16, **grid_kw) -> SamplingPlan:
    inner = np.linspace(a, b, n_spatial + 2)[1:-1].reshape(-1, 1)
    return SamplingPlan(inner, log_t_grid(**grid_kw))


def plan_for_rectangle(ax: float, bx: float, ay: float, by: float,
                       n_per_side: int = 4, **grid_kw) -> SamplingPlan:
    gx = np.linspace(ax, bx, n_per_side + 2)[1:-1]
    gy = np.linspace(ay, by, n_per_side + 2)[1:-1]
    xx, yy = np.meshgrid(gx, gy, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    return SamplingPlan(pts, log_t_grid(**grid_kw))


@dataclass(frozen=True)
class GrowthCertificate:
    condition: str
    passed: bool
    constant: float
    witness: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    worst: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.condition not in ("A0", "A1", "A2", "aInc/aDec", "domination"):
            raise ConfigurationError(f"unknown condition id {self.condition!r}")


def certify_a0(phi: PhiFunction, plan: SamplingPlan, beta_min: float = 0.01,
               beta_grid: Optional[np.ndarray] = None,
               tol: float = 1e-9) -> GrowthCertificate:
    """Largest beta on a grid with phi(x,beta) <= 1 <= phi(x,1/beta) at all samples.

    ``tol`` absorbs float noise when a grid point sits exactly on the
    normalization threshold.
    """
    if beta_grid is None:
        beta_grid = np.linspace(0.001, 1.0, 1000)
    beta_grid = np.asarray(beta_grid, dtype=float)
    pts = plan.points
    low = phi.eval(pts, beta_grid[:, None])          # (B, m)
    high = phi.eval(pts, 1.0 / beta_grid[:, None])
    ok = np.all(low <= 1.0 + tol, axis=1) & np.all(high >= 1.0 - tol, axis=1)
    if not ok.any():
        worst_idx = int(np.argmax(low[0]))
        worst = {"beta": float(beta_grid[0]),
                 "x": pts[worst_idx].tolist(),
                 "phi_at_beta": float(low[0, worst_idx])}
        return GrowthCertificate("A0", False, 0.0, {"beta_min": beta_min},
                                 plan.description(), worst)
    beta = float(beta_grid[ok].max())
    k = int(np.flatnonzero(ok).max())
    worst_x = int(np.argmax(low[k]))
    worst = {"beta": beta, "x": pts[worst_x].tolist(),
             "phi_at_beta": float(low[k, worst_x])}
    return GrowthCertificate("A0", beta >= beta_min, beta, {"beta_min": beta_min},
                             plan.description(), worst)


def _ball_measure(radius: float, dim: int) -> float:
    return 2.0 * radius if dim == 1 else np.pi * radius ** 2


def certify_a1(phi: PhiFunction, plan: SamplingPlan,
               ball_radii: Sequence[float], beta_min: float = 0.75,
               t_count: int = 12) -> GrowthCertificate:
    """Minimal sampled ratio phi^{-1}(y,t) / phi^{-1}(x,t) over small balls.

    For each radius r, every pair of plan points lying in a common ball of
    radius r is tested on a log t-grid spanning [1, 1/|B|].  The measured
    constant is the worst ratio; the certificate passes when it stays
    above ``beta_min``.
    """
    pts = plan.points
    dim = plan.dimension
    rng = np.random.default_rng(plan.seed)
    worst = {"ratio": np.inf}
    min_ratio = np.inf
    for r in ball_radii:
        if r <= 0:
            raise ConfigurationError("ball radii must be positive")
        measure = _ball_measure(r, dim)
        if 1.0 / measure <= 1.0:
            continue  # empty t-range: the condition is vacuous at this radius
        d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1)
        # pairs within a common ball of radius r: distance < 2r suffices
        # (both lie in the ball centred at the midpoint), and any pair in a
        # common ball is within 2r of each other.
        ii, jj = np.nonzero((d2 < (2.0 * r) ** 2) & (d2 > 0.0))
        if ii.size == 0:
            raise ConfigurationError(
                f"ball radius {r:g} is below the plan's spatial resolution"
            )
        if ii.size > plan.pair_count:
            sel = rng.choice(ii.size, size=plan.pair_count, replace=False)
            sel.sort()
            ii, jj = ii[sel], jj[sel]
        t = np.geomspace(1.0, 1.0 / measure, t_count)
        inv_i = inverse(phi, pts[ii], t[:, None])   # (T, P)
        inv_j = inverse(phi, pts[jj], t[:, None])
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(inv_i > 0, inv_j / inv_i, np.inf)
        k = np.unravel_index(int(np.argmin(ratio)), ratio.shape)
        if float(ratio[k]) < min_ratio:
            min_ratio = float(ratio[k])
            worst = {
                "ratio": min_ratio,
                "x": pts[ii[k[1]]].tolist(),
                "y": pts[jj[k[1]]].tolist(),
                "t": float(t[k[0]]),
                "radius": float(r),
            }
    if not np.isfinite(min_ratio):
        raise ConfigurationError("no radius produced a testable pair")
    return GrowthCertificate(
        "A1", min_ratio >= beta_min, min_ratio,
        {"beta_min": beta_min, "radii": [float(r) for r in ball_radii]},
        plan.description(), worst,
    )


@dataclass(frozen=True)
class ComparabilityWitness:
    """(phi_inf, h, beta, s) certifying comparability with a fixed profile.

    ``h`` is either a constant or a callable over sampled points.
    """

    phi_inf: PhiFunction
    h: object = 0.0
    beta: float = 1.0
    s: float = 1.0


def spatially_constant(phi: PhiFunction) -> bool:
    """True when no coefficient field of the family actually varies."""
    if isinstance(phi, (PowerPhi, OrliczLogPhi)):
        return True
    if isinstance(phi, VariableExponentPhi):
        return phi.exponent.lower == phi.exponent.upper
    if isinstance(phi, DoublePhasePhi):
        return phi.weight.lower == phi.weight.upper
    if isinstance(phi, WeightedPhi):
        return phi.weight.lower == phi.weight.upper and spatially_constant(phi.base)
    if isinstance(phi, PowerOfPhi):
        return spatially_constant(phi.base)
    if isinstance(phi, SumPhi):
        return all(spatially_constant(p) for p in phi.parts)
    if isinstance(phi, ConjugatePhi):
        return spatially_constant(phi.base)
    return False


def canonical_a2_witness(phi: PhiFunction, s: float = 1.0) -> ComparabilityWitness:
    """The witness shipped with each built-in family.

    Spatially constant functions witness themselves with h = 0.  The
    x-dependent families use their extreme coefficient envelopes with a
    constant h sized from the threshold s.
    """
    if spatially_constant(phi):
        return ComparabilityWitness(phi_inf=phi, h=0.0, beta=1.0, s=s)
    if isinstance(phi, VariableExponentPhi):
        p_lo, p_hi = phi.exponent.lower, phi.exponent.upper
        h = max(1.0, s ** (p_hi / p_lo))
        return ComparabilityWitness(PowerPhi(p_lo), h=h, beta=1.0, s=s)
    if isinstance(phi, DoublePhasePhi):
        a_hi = phi.weight.upper
        prof = DoublePhasePhi(phi.p, phi.q, constant_field(a_hi))
        return ComparabilityWitness(prof, h=a_hi * s ** (phi.q / phi.p), beta=1.0, s=s)
    if isinstance(phi, WeightedPhi) and spatially_constant(phi.base):
        w_lo, w_hi = phi.weight.lower, phi.weight.upper
        prof = WeightedPhi(phi.base, constant_field(w_hi))
        return ComparabilityWitness(prof, h=(w_hi - w_lo) * s / w_lo, beta=1.0, s=s)
    raise ConfigurationError(
        f"no canonical comparability witness for {type(phi).__name__} with "
        "nested spatial dependence"
    )


def _h_values(h, pts) -> np.ndarray:
    vals = h(pts) if callable(h) else np.full(pts.shape[0], float(h))
    vals = np.asarray(vals, dtype=float)
    if not np.all(np.isfinite(vals)) or np.any(vals < 0):
        raise WitnessInvalidError("witness h must be finite and non-negative on samples")
    return vals


def certify_a2(phi: PhiFunction, witness: ComparabilityWitness,
               plan: SamplingPlan, tol: float = 1e-12) -> GrowthCertificate:
    """Check both comparability inequalities of a supplied witness.

    The witness is checked, never searched for: on every sampled x and t,
    phi(x, beta t) <= phi_inf(t) + h(x) whenever phi_inf(t) <= s, and
    phi_inf(beta t) <= phi(x, t) + h(x) whenever phi(x, t) <= s.
    """
    pts = plan.points
    t = plan.t_grid
    if not (0 < witness.beta <= 1):
        raise WitnessInvalidError("witness beta must lie in (0, 1]")
    if witness.s <= 0:
        raise WitnessInvalidError("witness s must be positive")
    h = _h_values(witness.h, pts)
    x_ref = pts[:1]
    inf_t = np.asarray(witness.phi_inf.eval(x_ref, t[:, None])).reshape(-1)  # (T,)
    phi_t = phi.eval(pts, t[:, None])                                        # (T, m)
    phi_beta_t = phi.eval(pts, witness.beta * t[:, None])
    inf_beta_t = np.asarray(witness.phi_inf.eval(x_ref, witness.beta * t[:, None])).reshape(-1)

    gap1 = phi_beta_t - (inf_t[:, None] + h[None, :])
    gap1 = np.where(inf_t[:, None] <= witness.s, gap1, -np.inf)
    gap2 = inf_beta_t[:, None] - (phi_t + h[None, :])
    gap2 = np.where(phi_t <= witness.s, gap2, -np.inf)
    worst_gap = max(float(np.max(gap1)), float(np.max(gap2)))
    which = 1 if float(np.max(gap1)) >= float(np.max(gap2)) else 2
    gaps = gap1 if which == 1 else gap2
    k = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
    worst = {
        "inequality": which,
        "gap": worst_gap,
        "x": pts[k[1]].tolist(),
        "t": float(t[k[0]]),
    }
    passed = worst_gap <= tol
    return GrowthCertificate(
        "A2", passed, worst_gap,
        {"beta": witness.beta, "s": witness.s}, plan.description(), worst,
    )


def certify_ainc_adec(phi: PhiFunction, p: float, q: float, plan: SamplingPlan,
                      ceiling: float = 4.0) -> GrowthCertificate:
    """Measure almost-monotonicity constants of phi/t^p (up) and phi/t^q (down).

    L_p is the largest sampled violation factor of monotone increase of
    t -> phi(x,t)/t^p over ordered pairs on the t-grid; L_q likewise for
    decrease of phi/t^q.  Exactly monotone families measure 1.
    """
    if not (1 <= p <= q):
        raise ConfigurationError("need 1 <= p <= q")
    pts = plan.points
    t = plan.t_grid
    vals = phi.eval(pts, t[:, None])                    # (T, m)
    with np.errstate(divide="ignore", invalid="ignore"):
        vp = vals / t[:, None] ** p
        vq = vals / t[:, None] ** q
    # max over s < t of vp(s)/vp(t): running max against current value
    lp_grid = np.maximum.accumulate(vp, axis=0) / vp
    lq_grid = vq / np.minimum.accumulate(vq, axis=0)
    l_p = float(np.max(lp_grid))
    l_q = float(np.max(lq_grid))
    kp = np.unravel_index(int(np.argmax(lp_grid)), lp_grid.shape)
    kq = np.unravel_index(int(np.argmax(lq_grid)), lq_grid.shape)
    constant = max(l_p, l_q)
    passed = np.isfinite(constant) and l_p <= ceiling and l_q <= ceiling
    worst = {
        "L_p_at": {"x": pts[kp[1]].tolist(), "t": float(t[kp[0]])},
        "L_q_at": {"x": pts[kq[1]].tolist(), "t": float(t[kq[0]])},
    }
    return GrowthCertificate(
        "aInc/aDec", bool(passed), constant,
        {"p": p, "q": q, "L_p": l_p, "L_q": l_q, "ceiling": ceiling},
        plan.description(), worst,
    )


@dataclass(frozen=True)
class YoungReport:
    passed: bool
    max_violation: float
    worst: dict
    checked: int
    convex_bound_passed: Optional[bool] = None
    convex_bound_max: Optional[float] = None


def check_young(phi: PhiFunction, plan: SamplingPlan, tol: float = 1e-9) -> YoungReport:
    """Scan s t <= phi(x,s) + phi*(x,t) over the plan grid.

    For convex families the additional pointwise bound
    phi*(x, phi(x,t)/t) <= phi(x,t) is scanned as well.
    """
    pts = plan.points
    t = plan.t_grid
    phi_s = phi.eval(pts, t[:, None])                       # (S, m)
    star_t = conjugate_eval(phi, pts, t[:, None])           # (T, m)
    st = t[:, None, None] * t[None, :, None]                # (S, T, 1)
    rhs = phi_s[:, None, :] + star_t[None, :, :]
    violation = st - rhs - tol * (1.0 + np.abs(st))
    max_v = float(np.max(violation))
    k = np.unravel_index(int(np.argmax(violation)), violation.shape)
    worst = {"s": float(t[k[0]]), "t": float(t[k[1]]), "x": pts[k[2]].tolist(),
             "gap": max_v}
    report_kwargs = {}
    if phi.convex:
        slope = phi_s / t[:, None]
        bound = conjugate_eval(phi, pts, slope) - phi_s * (1.0 + tol)
        report_kwargs["convex_bound_max"] = float(np.max(bound))
        report_kwargs["convex_bound_passed"] = bool(np.max(bound) <= 0.0)
    passed = max_v <= 0.0 and report_kwargs.get("convex_bound_passed", True)
    return YoungReport(passed, max_v, worst, int(st.size), **report_kwargs)


@dataclass(frozen=True)
class DominationResult:
    """Measured two-sided domination constants between two growth functions.

    ``l_forward`` bounds phi_i / phi^{1+theta} for t >= t0 and
    ``l_backward`` the reverse; ``c_forward``/``c_backward`` measure the
    derived all-t bound phi_i <= C (phi^{1+theta} + 1).
    """

    l_forward: float
    l_backward: float
    c_forward: float
    c_backward: float
    theta: float
    t0: float
    worst: dict


def domination_constant(phi_i: PhiFunction, phi: PhiFunction, theta: float,
                        t0: float, plan: SamplingPlan) -> DominationResult:
    if theta <= 0:
        raise ConfigurationError("theta must be positive")
    if t0 <= 0:
        raise ConfigurationError("t0 must be positive")
    pts = plan.points
    t_tail = plan.t_grid[plan.t_grid >= t0]
    # the sup over t >= t0 must sample the endpoint itself
    t_tail = np.unique(np.concatenate([[t0], t_tail]))
    vi = phi_i.eval(pts, t_tail[:, None])
    v = phi.eval(pts, t_tail[:, None])
    if np.any(v <= 0.0) or np.any(vi <= 0.0):
        raise DegenerateComparisonError("growth function vanishes at some t >= t0")
    fwd = vi / v ** (1.0 + theta)
    bwd = v / vi ** (1.0 + theta)
    kf = np.unravel_index(int(np.argmax(fwd)), fwd.shape)
    t_all = plan.t_grid
    vi_all = phi_i.eval(pts, t_all[:, None])
    v_all = phi.eval(pts, t_all[:, None])
    c_fwd = float(np.max(vi_all / (v_all ** (1.0 + theta) + 1.0)))
    c_bwd = float(np.max(v_all / (vi_all ** (1.0 + theta) + 1.0)))
    worst = {"x": pts[kf[1]].tolist(), "t": float(t_tail[kf[0]]),
             "forward": float(fwd[kf])}
    return DominationResult(
        l_forward=float(np.max(fwd)),
        l_backward=float(np.max(bwd)),
        c_forward=c_fwd,
        c_backward=c_bwd,
        theta=theta,
        t0=t0,
        worst=worst,
    )
