"""Experiment configuration files.

Configs are INI-style documents with sections ``domain``, ``mesh``,
``phi``, ``operator``, ``data``, ``conditions``, ``solver`` and
``output``.  Coefficient fields and data are expression strings over the
coordinates.  Validation collects every violation instead of stopping at
the first.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .errors import ConfigurationError
from .expressions import Expression
from .fields import DomainSpec
from .metrics import Compact
from .operators import PerturbationLaw
from .phi import (
    CoefficientField,
    DoublePhasePhi,
    OrliczLogPhi,
    PhiFunction,
    PowerPhi,
    VariableExponentPhi,
)
from .solver import SolverConfig, default_solver_config

_KNOWN_SECTIONS = ("domain", "mesh", "phi", "operator", "data", "conditions",
                   "solver", "output")


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_id: str
    domain: DomainSpec
    resolution: int
    phi: PhiFunction
    law: PerturbationLaw
    i_max: int
    rho_target: float
    f: Expression
    psi: Optional[Expression]
    # condition-checking knobs
    t_min: float
    t_max: float
    t_count: int
    n_spatial: int
    pair_count: int
    beta_min_a0: float
    beta_min_a1: float
    a1_radii: Tuple[float, ...]
    ainc_ceiling: float
    gamma_proxy: float
    delta: float
    alpha: float
    t0: float
    t_cap: float
    hi_gammas: Tuple[float, ...]
    compacts: Tuple[Compact, ...]
    solver: SolverConfig
    output_dir: str
    seed: int = 0


def _field_from_expression(expr: Expression, domain: DomainSpec,
                           lower: Optional[float], upper: Optional[float],
                           description: str) -> CoefficientField:
    if lower is None or upper is None:
        # declared bounds estimated on a dense deterministic sample
        if domain.dimension == 1:
            a, b = domain.bounds
            pts = np.linspace(a, b, 4097).reshape(-1, 1)
        else:
            ax, bx, ay, by = domain.bounds
            g = np.linspace(0.0, 1.0, 65)
            xx, yy = np.meshgrid(ax + g * (bx - ax), ay + g * (by - ay))
            pts = np.column_stack([xx.ravel(), yy.ravel()])
            pts = pts[domain.contains(pts, tol=-1e-12)]
        vals = expr(pts)
        span = max(float(np.max(vals)) - float(np.min(vals)), 0.0)
        slack = 1e-9 * (1.0 + span)
        lower = float(np.min(vals)) - slack if lower is None else lower
        upper = float(np.max(vals)) + slack if upper is None else upper
    return CoefficientField(expr, lower, upper, description=description)


class _Collector:
    def __init__(self):
        self.violations: List[str] = []

    def add(self, message: str):
        self.violations.append(message)

    def get(self, parser, section, key, cast, default=None, required=False):
        if not parser.has_section(section):
            return default
        if not parser.has_option(section, key):
            if required:
                self.add(f"[{section}] missing required key '{key}'")
            return default
        raw = parser.get(section, key)
        try:
            return cast(raw)
        except (ValueError, ConfigurationError) as exc:
            self.add(f"[{section}] {key} = {raw!r}: {exc}")
            return default


def _floats(raw: str) -> Tuple[float, ...]:
    parts = raw.replace(",", " ").split()
    return tuple(float(p) for p in parts)


def _parse_compacts(raw: str, dimension: int) -> Tuple[Compact, ...]:
    out = []
    for chunk in raw.split(";"):
        vals = _floats(chunk)
        if len(vals) != 2 * dimension:
            raise ValueError(
                f"compact needs {2 * dimension} numbers (lo/hi per axis), got {len(vals)}")
        lo = vals[0::2]
        hi = vals[1::2]
        out.append(Compact(lo, hi))
    return tuple(out)


def parse_config(path, seed: int = 0, resolution_override: Optional[int] = None,
                 out_override: Optional[str] = None) -> ExperimentConfig:
    """Parse and validate a config file; raises with every violation listed."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse {path}: {exc}") from exc

    col = _Collector()
    for section in ("domain", "mesh", "phi", "data"):
        if not parser.has_section(section):
            col.add(f"missing section [{section}]")
    for section in parser.sections():
        if section not in _KNOWN_SECTIONS:
            col.add(f"unknown section [{section}]")

    geometry = col.get(parser, "domain", "geometry", str, required=True)
    bounds = col.get(parser, "domain", "bounds", _floats, required=True)
    domain = None
    if geometry and bounds:
        try:
            domain = DomainSpec(geometry, bounds)
        except ConfigurationError as exc:
            col.add(f"[domain] {exc}")
    dim = domain.dimension if domain else 1

    resolution = col.get(parser, "mesh", "resolution", int, required=True)
    if resolution is not None and resolution < 2:
        col.add("[mesh] resolution must be at least 2")
    if resolution_override is not None:
        resolution = resolution_override

    def expr_cast(raw):
        return Expression(raw, dim)

    phi = None
    family = col.get(parser, "phi", "family", str, required=True)
    if family and domain:
        try:
            phi = _build_phi(parser, family, domain, expr_cast, col)
        except ConfigurationError as exc:
            col.add(f"[phi] {exc}")

    law_kind = col.get(parser, "operator", "law", str, default="none")
    law = None
    if law_kind:
        try:
            m = None
            if parser.has_option("operator", "m"):
                m_expr = expr_cast(parser.get("operator", "m"))
                m = _field_from_expression(m_expr, domain, None, None, "m")
            law = PerturbationLaw(law_kind, m=m)
        except (ConfigurationError, ValueError) as exc:
            col.add(f"[operator] {exc}")
    i_max = col.get(parser, "operator", "i_max", int, default=8)
    rho_target = col.get(parser, "operator", "rho_target", float, default=0.1)

    f_expr = col.get(parser, "data", "f", expr_cast, required=True)
    psi_expr = col.get(parser, "data", "psi", expr_cast, default=None)

    t_min = col.get(parser, "conditions", "t_min", float, default=1e-3)
    t_max = col.get(parser, "conditions", "t_max", float, default=1e3)
    t_count = col.get(parser, "conditions", "t_count", int, default=32)
    n_spatial = col.get(parser, "conditions", "n_spatial", int,
                        default=64 if dim == 1 else 8)
    pair_count = col.get(parser, "conditions", "pair_count", int, default=256)
    beta_min_a0 = col.get(parser, "conditions", "beta_min_a0", float, default=0.01)
    beta_min_a1 = col.get(parser, "conditions", "beta_min_a1", float, default=0.75)
    default_radii = "0.05 0.1" if dim == 1 else "0.1 0.2"
    a1_radii = col.get(parser, "conditions", "a1_radii", _floats,
                       default=_floats(default_radii))
    ainc_ceiling = col.get(parser, "conditions", "ainc_ceiling", float, default=4.0)
    gamma_proxy = col.get(parser, "conditions", "gamma_proxy", float, default=0.4)
    delta = col.get(parser, "conditions", "delta", float, default=0.05)
    alpha = col.get(parser, "conditions", "alpha", float, default=0.25)
    t0 = col.get(parser, "conditions", "t0", float, default=1.0)
    t_cap = col.get(parser, "conditions", "t_cap", float, default=10.0)
    hi_gammas = col.get(parser, "conditions", "hi_gammas", _floats,
                        default=(0.1, 0.25, 0.5))
    default_compact = "0.25 0.75" if dim == 1 else "0.25 0.75 0.25 0.75"
    compacts = col.get(parser, "conditions", "compacts",
                       lambda raw: _parse_compacts(raw, dim),
                       default=_parse_compacts(default_compact, dim))

    if delta is not None and delta <= 0:
        col.add("[conditions] delta must be positive")
    if alpha is not None and not 0 < alpha <= 1:
        col.add("[conditions] alpha must lie in (0, 1]")
    for name, value in (("t_min", t_min), ("t_max", t_max), ("t0", t0),
                        ("t_cap", t_cap)):
        if value is not None and value <= 0:
            col.add(f"[conditions] {name} must be positive")

    solver_kwargs = {}
    for key, cast in (("max_iter", int), ("tol_pg", float), ("tol_vi", float),
                      ("step_rule", str), ("initial_point", str),
                      ("fixed_step", float)):
        val = col.get(parser, "solver", key, cast)
        if val is not None:
            solver_kwargs["tol_vi_rel" if key == "tol_vi" else key] = val
    solver = None
    try:
        solver = default_solver_config(dim, **solver_kwargs)
    except ConfigurationError as exc:
        col.add(f"[solver] {exc}")
    if solver is not None and (solver.tol_pg <= 0 or solver.tol_vi_rel <= 0):
        col.add("[solver] tolerances must be positive")

    output_dir = col.get(parser, "output", "dir", str, default="out")
    if out_override is not None:
        output_dir = out_override

    if col.violations:
        raise ConfigurationError(
            "invalid config:\n  " + "\n  ".join(col.violations))

    return ExperimentConfig(
        experiment_id=path.stem,
        domain=domain,
        resolution=resolution,
        phi=phi,
        law=law,
        i_max=i_max,
        rho_target=rho_target,
        f=f_expr,
        psi=psi_expr,
        t_min=t_min, t_max=t_max, t_count=t_count,
        n_spatial=n_spatial, pair_count=pair_count,
        beta_min_a0=beta_min_a0, beta_min_a1=beta_min_a1,
        a1_radii=tuple(a1_radii), ainc_ceiling=ainc_ceiling,
        gamma_proxy=gamma_proxy, delta=delta, alpha=alpha,
        t0=t0, t_cap=t_cap, hi_gammas=tuple(hi_gammas),
        compacts=compacts, solver=solver, output_dir=output_dir, seed=seed,
    )


def _build_phi(parser, family, domain, expr_cast, col) -> PhiFunction:
    def opt_float(key):
        return parser.getfloat("phi", key) if parser.has_option("phi", key) else None

    if family == "power":
        p = parser.getfloat("phi", "p")
        scale = opt_float("scale") or 1.0
        return PowerPhi(p, scale=scale)
    if family == "orlicz_log":
        return OrliczLogPhi(parser.getfloat("phi", "p"))
    if family == "variable_exponent":
        expr = expr_cast(parser.get("phi", "exponent"))
        fieldv = _field_from_expression(expr, domain, opt_float("exponent_min"),
                                        opt_float("exponent_max"), "p(x)")
        return VariableExponentPhi(fieldv)
    if family == "double_phase":
        p = parser.getfloat("phi", "p")
        q = parser.getfloat("phi", "q")
        expr = expr_cast(parser.get("phi", "weight"))
        fieldv = _field_from_expression(expr, domain, opt_float("weight_min"),
                                        opt_float("weight_max"), "a(x)")
        return DoublePhasePhi(p, q, fieldv)
    raise ConfigurationError(f"unknown phi family {family!r}")
