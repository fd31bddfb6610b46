"""Two-metric adaptive projection solver for l1-regularized minimization."""

from .analysis import (
    RateEstimate,
    active_set_hash,
    complementarity_margin,
    estimate_rate,
    track_identification,
)
from .partition import IndexPartition, adaptive_project, compute_partition, shift_vector
from .problems import (
    DenseOperator,
    LassoOracle,
    LogisticOracle,
    PartialDctOperator,
    ProblemOracle,
    SaturatingQuadraticOracle,
    dct_matrix,
    generate_lasso_instance,
)
from .prox import gradient_map, prox_l1, soft_threshold, stationarity_residual
from .safeguard import prox_grad_step, solve_prox_grad, solve_safeguarded
from .solver import (
    IterationRecord,
    SafeguardStats,
    SolveReport,
    SolverConfig,
    acceptance_test,
    build_step,
    objective_value,
    solve,
    trial_point,
)
from .subproblem import NewtonSolveStats, compute_damping, masked_hessvec, solve_newton

__version__ = "0.1.0"

__all__ = [
    "IndexPartition",
    "IterationRecord",
    "DenseOperator",
    "LassoOracle",
    "LogisticOracle",
    "NewtonSolveStats",
    "PartialDctOperator",
    "ProblemOracle",
    "RateEstimate",
    "SafeguardStats",
    "SaturatingQuadraticOracle",
    "SolveReport",
    "SolverConfig",
    "acceptance_test",
    "active_set_hash",
    "adaptive_project",
    "build_step",
    "complementarity_margin",
    "compute_damping",
    "compute_partition",
    "dct_matrix",
    "estimate_rate",
    "generate_lasso_instance",
    "gradient_map",
    "masked_hessvec",
    "objective_value",
    "prox_grad_step",
    "prox_l1",
    "shift_vector",
    "soft_threshold",
    "solve",
    "solve_newton",
    "solve_prox_grad",
    "solve_safeguarded",
    "stationarity_residual",
    "track_identification",
    "trial_point",
]
