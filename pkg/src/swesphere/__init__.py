"""Energy-stable DG spectral element shallow water solver on the cubed sphere."""

from .quadrature import QuadRule, gll_rule, lagrange_eval, diff_matrix
from .geometry import Mesh, EdgeLink, equiangular_map, build_mesh, boundary_frames
from .operators import (
    inner_scalar,
    inner_vector,
    project_scalar,
    project_vector,
    d_grad,
    d_div,
    d_curl_vec,
    d_curl_scalar,
    edge_traces,
    edge_average,
    edge_jump,
    boundary_integral,
    evaluate_scalar,
)
from .swe import (
    State,
    PhysConfig,
    FluxConfig,
    FlaggedStateError,
    CONSERVING,
    DISSIPATIVE,
    potential_G,
    mass_flux_F,
    wave_speed,
    compute_vorticity,
    rhs_nonlinear,
    rhs_linear,
    energy_rate,
    entropy_hessian_eigs,
    subcritical,
)
from .timestepping import TimeControls, ssp_rk3_step, adaptive_dt, integrate
from .diagnostics import (
    BudgetRecord,
    budgets,
    l2_error_scalar,
    l2_error_vector,
    state_errors,
    convergence_order,
    least_squares_order,
)
from .testcases import (
    TESTCASES,
    get_case,
    init_linear_geostrophic,
    init_williamson2,
    init_williamson5,
    init_williamson6,
    init_galewsky,
    reference_solution,
)

__all__ = [
    "QuadRule",
    "gll_rule",
    "lagrange_eval",
    "diff_matrix",
    "Mesh",
    "EdgeLink",
    "equiangular_map",
    "build_mesh",
    "boundary_frames",
    "inner_scalar",
    "inner_vector",
    "project_scalar",
    "project_vector",
    "d_grad",
    "d_div",
    "d_curl_vec",
    "d_curl_scalar",
    "edge_traces",
    "edge_average",
    "edge_jump",
    "boundary_integral",
    "evaluate_scalar",
    "State",
    "PhysConfig",
    "FluxConfig",
    "FlaggedStateError",
    "CONSERVING",
    "DISSIPATIVE",
    "potential_G",
    "mass_flux_F",
    "wave_speed",
    "compute_vorticity",
    "rhs_nonlinear",
    "rhs_linear",
    "energy_rate",
    "entropy_hessian_eigs",
    "subcritical",
    "TimeControls",
    "ssp_rk3_step",
    "adaptive_dt",
    "integrate",
    "BudgetRecord",
    "budgets",
    "l2_error_scalar",
    "l2_error_vector",
    "state_errors",
    "convergence_order",
    "least_squares_order",
    "TESTCASES",
    "get_case",
    "init_linear_geostrophic",
    "init_williamson2",
    "init_williamson5",
    "init_williamson6",
    "init_galewsky",
    "reference_solution",
]

__version__ = "0.1.0"
