"""Numerical laboratory for generalized Orlicz (Musielak-Orlicz) growth:
Phi-function calculus with sampled condition certification, obstacle
problems driven by phi-Laplacian-type operators, measured energy
inequalities, and stability experiments for operator perturbations.
"""

from .conditions import (
    ComparabilityWitness,
    DominationResult,
    GrowthCertificate,
    SamplingPlan,
    canonical_a2_witness,
    certify_a0,
    certify_a1,
    certify_a2,
    certify_ainc_adec,
    check_young,
    domination_constant,
)
from .errors import OrliczLabError
from .fields import DiscreteField, DomainSpec, Mesh, build_mesh
from .metrics import (
    Compact,
    holder_distance,
    holder_seminorm,
    luxemburg_norm,
    modular,
    sobolev_distance,
)
from .operators import (
    OperatorHandle,
    PerturbationLaw,
    StructureCertificate,
    canonical_operator,
    certify_structure,
    convergence_gap,
    perturbed_operator,
    perturbed_phi,
)
from .phi import (
    CoefficientField,
    ConjugatePhi,
    DoublePhasePhi,
    OrliczLogPhi,
    PhiFunction,
    PowerOfPhi,
    PowerPhi,
    SumPhi,
    VariableExponentPhi,
    WeightedPhi,
    conjugate_eval,
    constant_field,
    eval_growth_rate,
    eval_phi,
    inverse,
)
from .solver import (
    ObstacleProblem,
    SolveResult,
    SolverConfig,
    default_solver_config,
    quasiminimizer_ratio,
    solve_obstacle,
    supersolution_check,
    vi_residual,
)
from .stability import (
    StabilityExperiment,
    StabilityReport,
    convergence_metrics,
    run_experiment,
    theta_schedule,
)

__version__ = "0.1.0"
