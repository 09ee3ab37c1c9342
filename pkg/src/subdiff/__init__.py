"""Discrete Caputo derivatives and finite-difference schemes for the
time-fractional diffusion equation, with executable audits of the provable
weight and energy inequalities and a refinement-study harness."""

from .grids import (
    ErrorSummary,
    GridLayer,
    SolutionHistory,
    SpaceGrid,
    convergence_order,
    error_norms,
    l2_norm,
    max_norm,
)
from .harness import (
    ConvergenceReport,
    LevelSpec,
    ReportRow,
    StudyPlan,
    emit,
    monomial_error,
    run_study,
    study_plan,
)
from .kernels import (
    L1,
    L21SIGMA,
    AuditCheck,
    FractionalOrder,
    TimeGrid,
    WeightAudit,
    WeightVector,
    apply,
    audit_weight_family,
    audit_weights,
    caputo_power_rule,
    caputo_reference,
    coeff_a,
    coeff_b,
    weights,
    weights_l1,
)
from .problems import (
    PROBLEM_IDS,
    MonomialCase,
    NamedProblem,
    get_problem,
    problem_caputo_monomial,
    problem_timecoeff_compact,
    problem_varcoeff_2nd,
)
from .schemes import (
    EnergyProbe,
    L1Provider,
    L21SigmaProvider,
    ProblemSpec,
    SchemeCompatibilityError,
    StabilityReport,
    a_priori_bound,
    check_stability_conditions,
    energy_inequality_probe,
    run_compact,
    run_second_order,
    step_compact,
    step_second_order,
)
from .tridiag import SingularSystemError, TridiagonalSystem, solve_tridiagonal

__version__ = "0.1.0"

__all__ = [
    "AuditCheck",
    "ConvergenceReport",
    "EnergyProbe",
    "ErrorSummary",
    "FractionalOrder",
    "GridLayer",
    "L1",
    "L1Provider",
    "L21SIGMA",
    "L21SigmaProvider",
    "LevelSpec",
    "MonomialCase",
    "NamedProblem",
    "PROBLEM_IDS",
    "ProblemSpec",
    "ReportRow",
    "SchemeCompatibilityError",
    "SingularSystemError",
    "SolutionHistory",
    "SpaceGrid",
    "StabilityReport",
    "StudyPlan",
    "TimeGrid",
    "TridiagonalSystem",
    "WeightAudit",
    "WeightVector",
    "__version__",
    "a_priori_bound",
    "apply",
    "audit_weight_family",
    "audit_weights",
    "caputo_power_rule",
    "caputo_reference",
    "check_stability_conditions",
    "coeff_a",
    "coeff_b",
    "convergence_order",
    "emit",
    "energy_inequality_probe",
    "error_norms",
    "get_problem",
    "l2_norm",
    "max_norm",
    "monomial_error",
    "problem_caputo_monomial",
    "problem_timecoeff_compact",
    "problem_varcoeff_2nd",
    "run_compact",
    "run_second_order",
    "run_study",
    "solve_tridiagonal",
    "step_compact",
    "step_second_order",
    "study_plan",
    "weights",
    "weights_l1",
]
