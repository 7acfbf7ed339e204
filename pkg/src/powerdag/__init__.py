"""Linear DAG structure learning with matrix-power acyclicity constraints."""

from .constraints import (
    CONSTRAINT_NAMES,
    ConstraintEval,
    build_evaluator,
    chain_hadamard,
    h_binomial,
    h_exp_taylor,
    h_fast_tmpi,
    h_geo,
    h_poly,
    h_single,
    h_tmpi,
    h_trunc,
    per_order_gradient_norms,
    truncation_profile,
)
from .errors import (
    DivergedError,
    DomainError,
    NumericOverflowError,
    PowerDagError,
    ShapeError,
    SingularMatrixError,
)
from .metrics import StructMetrics, is_acyclic, score, topological_order
from .objectives import LossEval, golem_likelihood, least_squares
from .simulate import GraphSpec, SemProblem, assign_weights, gen_dag, make_problem, sample_sem
from .solver import (
    GolemConfig,
    LearnResult,
    SolverConfig,
    inner_solve,
    solve_golem,
    solve_notears,
    threshold_and_repair,
)

__version__ = "0.1.0"

__all__ = [
    "CONSTRAINT_NAMES",
    "ConstraintEval",
    "DivergedError",
    "DomainError",
    "GolemConfig",
    "GraphSpec",
    "LearnResult",
    "LossEval",
    "NumericOverflowError",
    "PowerDagError",
    "SemProblem",
    "ShapeError",
    "SingularMatrixError",
    "SolverConfig",
    "StructMetrics",
    "assign_weights",
    "build_evaluator",
    "chain_hadamard",
    "gen_dag",
    "golem_likelihood",
    "h_binomial",
    "h_exp_taylor",
    "h_fast_tmpi",
    "h_geo",
    "h_poly",
    "h_single",
    "h_tmpi",
    "h_trunc",
    "inner_solve",
    "is_acyclic",
    "least_squares",
    "make_problem",
    "per_order_gradient_norms",
    "sample_sem",
    "score",
    "solve_golem",
    "solve_notears",
    "threshold_and_repair",
    "topological_order",
    "truncation_profile",
]
