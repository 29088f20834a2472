"""Numerical laboratory for dead-core problems of the normalized p-Laplacian
with strong absorption: closed-form radial profiles and barriers, a grid
Dirichlet solver with Perron brackets, a tug-of-war value iteration and game
simulator, and free-boundary geometry measurements."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    CriticalRegime,
    DeadcoreError,
    DomainTooCoarse,
    GameValueMismatch,
    GridMismatch,
    InsufficientSignal,
    NoFreeBoundary,
    NonSmoothPoint,
    NotApplicable,
    ParameterError,
    StencilOutOfDomain,
    UnsupportedGameRange,
    VanishingGradient,
)
from .game import GameConfig, WalkStats, run_game
from .geometry import (
    check_nondegeneracy,
    default_fit_radii,
    distance_bounds,
    estimate_porosity,
    fit_gradient_decay,
    fit_growth_exponent,
    l2_hessian_average,
    measure_density,
    positivity_set,
)
from .grid import GridDomain, SolutionField, SolverConfig
from .operators import (
    EllipticityBounds,
    PointJet,
    discrete_jet,
    normalized_inf_laplacian,
    normalized_p_laplacian,
    p_laplacian_zero_gradient_bracket,
    pde_residual,
    pucci,
)
from .params import (
    DerivedExponents,
    ProblemSpec,
    StructuralParams,
    ThieleSpec,
    compute_beta,
    compute_cnd,
    compute_game_weights,
    compute_radial_constant,
    henon_exponent,
)
from .radial import (
    ExpBarrier,
    LiouvilleSupersolution,
    PowerBarrier,
    RadialDeadCore,
    calibrate_exp_barrier,
    exp_barrier_residual_sign,
    henon_radial_profile,
    liouville_supersolution_eval,
)
from .solver import (
    comparison_check,
    dpp_iterate,
    flatness_experiment,
    rescale,
    solve_dirichlet,
    solve_p_harmonic,
)
