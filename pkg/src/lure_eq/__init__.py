"""Equilibria of set-valued Lur'e systems via resolvent splitting.

The package computes zeros of ``f + B (F**-1 + D)**-1 C`` for a Lipschitz
drift f, structure matrices B, C, D and a catalog maximal monotone F, solves
the equivalent moving-set quasi-variational inequalities and Nash
quasi-equilibrium games, and integrates system trajectories with explicit and
implicit time-stepping.
"""

from .operators import (
    AffineMap,
    BallNormalCone,
    BlockDiagonal,
    BoxNormalCone,
    ConvergenceError,
    DimensionError,
    DomainViolation,
    IdentityOperator,
    L1Subdifferential,
    LipschitzMap,
    MonotoneLinear,
    MonotoneOperator,
    NonnegativeOrthantCone,
    PositiveDefiniteMap,
    SignOperator,
    ZeroOperator,
    graph_residual,
    inverse_resolvent,
    member_residual,
    resolvent,
    resolvent_wrt,
)
from .calculus import (
    CompositeOperator,
    EquilibriumOperator,
    FeedthroughOperator,
    SemiCoercivity,
    semicoercivity,
)
from .solvers import (
    SolverConfig,
    SolverReport,
    Status,
    fb_strongly_monotone_solve,
    proximal_point_solve,
    tseng_solve,
)
from .lure import (
    LureSystem,
    Mode,
    Scheme,
    SystemValidationError,
    Trajectory,
    UnsupportedSchemeError,
    ValidationReport,
    equilibrium,
    inclusion_residual,
    simulate,
    validate,
)
from .qvi import (
    DualConstants,
    MovingSet,
    QviProblem,
    dual_constants,
    eval_dual_map,
    moving_set_check,
    qvi_to_inclusion,
    solve_qvi,
    solve_qvi_dual,
)
from .nash import (
    LinearCostGame,
    LinearGamePlayer,
    PlayerCertificate,
    ProxCostGame,
    ProxGamePlayer,
    assemble_linear_game,
    assemble_prox_game,
    certify_equilibrium,
    solve_game,
)
from .problems import ProblemBundle, ProblemFormatError, load_problem, parse_problem

__version__ = "0.1.0"
