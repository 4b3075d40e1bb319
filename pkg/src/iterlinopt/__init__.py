"""Fixed-point iteration of linear maximization over convex bodies.

The map sends a point to the domain's maximizer of the linear functional it
defines; iterating it climbs the squared norm and settles on distinguished
boundary points. The package provides closed-form oracles for balls,
ellipsoids, polytopes and cones, a coordinate-ascent oracle for the
unit-diagonal PSD body with an algebraic fixed-point certificate, fixed
point catalogs and classification, and a deterministic max-cut rounding
pipeline built on the iteration.
"""

__version__ = "0.1.0"

from .classify import (
    ClassificationResult,
    EscapeWitness,
    classify_elliptope_fixed_point,
    classify_empirical,
    escape_curve,
    escape_pair,
    vertex_basin_check,
)
from .domains import (
    BallDomain,
    BallFixedPoints,
    ConeDomain,
    ConvexDomain,
    DomainError,
    EllipsoidDomain,
    PolytopeDomain,
    ball_fixed_points,
    curvature_classify_2d,
    load_domain,
)
from .elliptope import (
    CensusPoint,
    DiagonalCertificate,
    ElliptopeDomain,
    ElliptopeError,
    FixedPointReport,
    OracleConfig,
    OracleResult,
    analyze_fixed_point,
    default_rank_budget,
    elliptope_oracle,
    enumerate_vertices,
    fixed_point_certificate,
    gamma_of_irreducible,
    gram_factor,
    gram_to_matrix,
    irreducible_components,
    is_in_elliptope,
    is_vertex,
    l3_census,
    l4_family,
    matrix_rank_psd,
    normal_cone_membership,
    read_matrix_text,
    sign_kernel_census,
    sign_kernel_fixed_point,
    validate_elliptope,
    write_matrix_text,
)
from .engine import (
    InfeasibleStartError,
    IterationConfig,
    MonotoneReport,
    Trajectory,
    check_monotone,
    iterate,
    objective_interpretation,
)
from .maxcut import (
    GraphFormatError,
    RoundingReport,
    WeightedGraph,
    brute_force_maxcut,
    cut_value,
    gw_hyperplane_round,
    load_graph,
    maxcut_pipeline,
    relaxation_cost,
    relaxed_cut_value,
    round_by_iteration,
    solve_relaxation,
)
