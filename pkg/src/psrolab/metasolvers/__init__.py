from psrolab.metasolvers.decoupled import (
    DecoupledPRD,
    DecoupledRegretMatching,
    Exp3,
    make_decoupled,
)
from psrolab.metasolvers.full import (
    ExplorationParams,
    IteratedSolver,
    SolverState,
    hedge_update_and_solve,
    prd_solve,
    rm_update_and_solve,
    solve_last,
    solve_uniform,
)
from psrolab.metasolvers.nash import solve_meta_nash
from psrolab.metasolvers.projection import project_gamma_simplex

__all__ = [
    "DecoupledPRD", "DecoupledRegretMatching", "Exp3", "make_decoupled",
    "ExplorationParams", "IteratedSolver", "SolverState", "hedge_update_and_solve", "prd_solve",
    "rm_update_and_solve", "solve_last", "solve_uniform", "solve_meta_nash", "project_gamma_simplex",
    "SOLVER_KINDS",
]

SOLVER_KINDS = ("uniform", "last", "ibr", "nash", "rm", "hedge", "prd", "drm", "exp3", "dprd")
