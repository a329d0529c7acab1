"""Cone spectral radii, positive eigenvectors, and eigenfunctionals of
homogeneous order-preserving maps on the nonnegative orthant, with a
discretized two-sex population model as the main application."""

__version__ = "0.1.0"

from .cone import (
    ConeSpace,
    ConeVector,
    NormKind,
    diamond_norm,
    leq,
    lower_ratio,
    meet,
    psi_hull,
    u_norm,
)
from .homog_map import (
    HomogeneousMap,
    MapFlag,
    OperatorNormEstimate,
    evaluate,
    from_callable,
    from_matrix,
    op_norm_plus,
    perturb,
    power_apply,
    verify_properties,
)
from .spectral import (
    ResolventResult,
    SpectralEstimate,
    cw_lower,
    cw_upper,
    radius_bracket,
    radius_power_quotient,
    resolvent_apply,
    resolvent_series,
)
from .eigenproblem import (
    EigenMode,
    EigenResult,
    EigenfunctionalEstimate,
    estimate_eigenfunctional,
    reduce_power_functional,
    refine_eigenvector_monotone,
    solve_eigenvector_perturbation,
    solve_subeigenvector_min,
)
from .twosex import (
    MatingFunction,
    MatingKind,
    MigrationKernel,
    SpatialGrid,
    TwoSexModel,
    assess_persistence,
    build_model,
    mating_value,
    simulate,
    step_next_year,
)
from .oracle import OracleReport, brute_force_bracket, linear_radius_exact
from . import errors

__all__ = [
    "ConeSpace", "ConeVector", "NormKind", "diamond_norm", "leq",
    "lower_ratio", "meet", "psi_hull", "u_norm",
    "HomogeneousMap", "MapFlag", "OperatorNormEstimate", "evaluate",
    "from_callable", "from_matrix", "op_norm_plus", "perturb",
    "power_apply", "verify_properties",
    "ResolventResult", "SpectralEstimate", "cw_lower", "cw_upper",
    "radius_bracket", "radius_power_quotient", "resolvent_apply",
    "resolvent_series",
    "EigenMode", "EigenResult", "EigenfunctionalEstimate",
    "estimate_eigenfunctional", "reduce_power_functional",
    "refine_eigenvector_monotone", "solve_eigenvector_perturbation",
    "solve_subeigenvector_min",
    "MatingFunction", "MatingKind", "MigrationKernel", "SpatialGrid",
    "TwoSexModel", "assess_persistence", "build_model", "mating_value",
    "simulate", "step_next_year",
    "OracleReport", "brute_force_bracket", "linear_radius_exact",
    "errors",
]
