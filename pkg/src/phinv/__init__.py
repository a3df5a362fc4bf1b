"""Pseudo-Hermitian invariants for time-dependent generalized Swanson
Hamiltonians: closed-form metric, invariant eigenstates and phases, plus
brute-force propagation oracles and residual meters for every identity."""

from ._version import __version__
from .errors import (
    ConfigError,
    ConstraintSingularityError,
    DimensionError,
    DomainError,
    FormatError,
    GuardError,
    InputError,
    InstabilityError,
    NoPreimageError,
    NonRealPhaseError,
    NumericsError,
    PhinvError,
    ShapeError,
    SingularMetricError,
    StencilError,
    StructureError,
    TruncationWarning,
)
from .fock import (
    OperatorSet,
    adjoint,
    apply,
    basis_state,
    build_operator_set,
    cached_operator_set,
    commutator,
    diagonal_power,
    frobenius_distance,
    interior_norm,
    nilpotent_exp,
    tail_support,
)
from .metric import (
    GaussParams,
    build_eta,
    build_rho,
    build_rho_inverse,
    conjugate_k,
    gauss_params,
    invert_gauss_params,
    ladder_exp,
    params_from_state,
)
from .model import (
    HamiltonianCoefficients,
    InvariantCoefficients,
    MetricState,
    MetricTrajectory,
    TransformedCoefficients,
    assemble_solution,
    constraint_residuals,
    derive_constrained_coeffs,
    eigenstate,
    hamiltonian_matrix,
    integrate_metric,
    invariant_ph,
    metric_rhs,
    phase,
    raw_metric_rates,
    wuv_coefficients,
)
from .position import (
    GaussianShape,
    GramResult,
    PositionGrid,
    canonical_invariant,
    cross_representation_residual,
    eigenfunction,
    fock_to_position,
    hermite,
    orthonormality_matrix,
)
from .propagator import (
    PropagationResult,
    convergence_probe,
    dyson_residual,
    hermitian_image_check,
    hermitian_side_check,
    invariant_residual,
    propagate,
    schrodinger_residual,
)
from .runner import RunResult, run_scenario, verify_artifacts
from .scenario import (
    DEFAULT_TOLERANCES,
    Profile,
    ScenarioConfig,
    demo_scenarios,
    parse_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
