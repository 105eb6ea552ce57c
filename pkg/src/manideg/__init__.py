"""Topological degree of tangent fields on implicitly defined manifolds.

The package computes Brouwer degrees of vector fields on boxes, reduces
degrees of tangent fields on level sets g(x, y) = 0 to such box
degrees, converts semi-explicit DAEs into equivalent flows on their
constraint manifolds, and continues branches of forced periodic
solution pairs certified by a nonzero seed-map degree.
"""

from .continuation import (
    Branch,
    SolutionPair,
    correct,
    seed_points,
    shooting_residual,
    trace_branch,
)
from .dae import (
    ForcedField,
    SemiExplicitDae,
    average_wind,
    build_autonomous_tangent,
    build_forcing_tangent,
    seed_map_F,
    seed_map_Phi,
)
from .degree import (
    DegreeResult,
    DomainBox,
    ZeroRecord,
    boundary_min,
    degree_sign_sum,
    degree_winding_2d,
    find_zeros,
    local_index,
)
from .errors import (
    AdmissibilityError,
    CorrectorError,
    DegenerateZeroError,
    DomainEscapeError,
    DomainEvalError,
    ExpressionSyntaxError,
    IntegrationError,
    ManidegError,
    NumericError,
    ProblemError,
    ProblemFormatError,
    RegularityError,
    RootFindingError,
    UndeclaredVariableError,
)
from .expr import Environment, evaluate, gradient, parse, to_source
from .fields import AmbientMap, FieldHandle
from .flow import FlowResult, flow_map, period_map, projected_step, write_trajectory_csv
from .manifold import (
    ImplicitConstraint,
    ManifoldDegreeResult,
    TangentField,
    complete_velocity,
    implicit_solve_y,
    manifold_degree,
    multi_region_degree,
    partial2_sign,
    reduced_map,
    schur_determinant_split,
    tangency_residual,
    tangent_completion,
)
from .problems import REGISTRY, Problem, format_problem, parse_problem

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "AmbientMap", "Branch", "CorrectorError",
    "DegenerateZeroError", "DegreeResult", "DomainBox", "DomainEscapeError",
    "DomainEvalError",
    "Environment", "ExpressionSyntaxError", "FieldHandle", "FlowResult",
    "ForcedField", "ImplicitConstraint", "IntegrationError", "ManidegError",
    "ManifoldDegreeResult", "NumericError", "Problem", "ProblemError",
    "ProblemFormatError", "REGISTRY", "RegularityError", "RootFindingError",
    "SemiExplicitDae", "SolutionPair", "TangentField",
    "UndeclaredVariableError", "ZeroRecord",
    "average_wind", "boundary_min", "build_autonomous_tangent",
    "build_forcing_tangent", "complete_velocity", "correct", "degree_sign_sum",
    "degree_winding_2d", "evaluate", "find_zeros", "flow_map",
    "format_problem", "gradient", "implicit_solve_y", "local_index",
    "manifold_degree", "multi_region_degree", "parse", "parse_problem",
    "partial2_sign", "period_map", "projected_step", "reduced_map",
    "schur_determinant_split", "seed_map_F", "seed_map_Phi", "seed_points",
    "shooting_residual", "tangency_residual", "tangent_completion",
    "to_source", "trace_branch", "write_trajectory_csv",
]
