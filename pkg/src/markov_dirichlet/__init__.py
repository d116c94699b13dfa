"""Dirichlet boundary value problems via boundary-clamped Markov operators.

The package discretizes a compact planar domain, builds row-stochastic
kernels that are absorbing on the boundary, iterates them to the unique
invariant field with prescribed boundary data, and verifies the barrier and
maximum-principle hypotheses that make the limit exist, at desk scale,
against independent linear-algebra oracles.
"""

from .algebra import (
    VanishingIdealReport,
    VarianceField,
    polarization_check,
    product_projection_test,
    residual_to_zero_test,
    vanishing_ideal_check,
    variance_function,
)
from .conditions import (
    Barrier,
    ConditionReport,
    empirical_max_principle,
    make_barrier,
    verify_condition_A,
    verify_condition_B,
)
from .errors import (
    AlgebraError,
    BarrierError,
    ConfigError,
    DomainError,
    FieldError,
    KernelError,
    MarkovDirichletError,
    MonotonicityError,
    OracleError,
    PresetError,
    SolverError,
)
from .fields import (
    ScalarField,
    constant_field,
    extend_boundary,
    read_field_csv,
    restrict_boundary,
    sup_norm,
    write_field_csv,
)
from .geometry import (
    DiscreteDomain,
    boundary_distance,
    build_domain,
    load_custom_domain,
    validate_domain,
)
from .kernels import (
    MarkovKernel,
    apply_kernel,
    build_kernel,
    interior_spectral_bound,
    load_custom_kernel,
)
from .oracle import (
    HittingDistribution,
    dense_spectral_radius,
    direct_solve,
    hitting_distribution,
    poisson_disk,
)
from .presets import make_boundary_data
from .solver import (
    SolveReport,
    boundary_equicontinuity_profile,
    iterate,
    monotone_run,
    theta_projection,
    uniqueness_test,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraError",
    "Barrier",
    "BarrierError",
    "ConditionReport",
    "ConfigError",
    "DiscreteDomain",
    "DomainError",
    "FieldError",
    "HittingDistribution",
    "KernelError",
    "MarkovDirichletError",
    "MarkovKernel",
    "MonotonicityError",
    "OracleError",
    "PresetError",
    "ScalarField",
    "SolveReport",
    "SolverError",
    "VanishingIdealReport",
    "VarianceField",
    "apply_kernel",
    "boundary_distance",
    "boundary_equicontinuity_profile",
    "build_domain",
    "build_kernel",
    "constant_field",
    "dense_spectral_radius",
    "direct_solve",
    "empirical_max_principle",
    "extend_boundary",
    "hitting_distribution",
    "interior_spectral_bound",
    "iterate",
    "load_custom_domain",
    "load_custom_kernel",
    "make_barrier",
    "make_boundary_data",
    "monotone_run",
    "polarization_check",
    "poisson_disk",
    "product_projection_test",
    "read_field_csv",
    "residual_to_zero_test",
    "restrict_boundary",
    "sup_norm",
    "theta_projection",
    "uniqueness_test",
    "validate_domain",
    "vanishing_ideal_check",
    "variance_function",
    "verify_condition_A",
    "verify_condition_B",
    "write_field_csv",
]
