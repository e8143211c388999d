"""Edge-structure learning for binary pairwise Markov random fields.

The estimator minimizes an importance-sampling approximation of the
penalized negative log-likelihood along a warm-started penalty path, with a
pseudolikelihood baseline, exact small-graph references, and a replication
harness.  Hot loops run in a compiled extension when built; a pure NumPy
backend is selected automatically otherwise (see isinglasso.backend).
"""

from .backend import BACKEND
from .edges import (
    EdgeIndex,
    edge_index,
    edge_pair,
    edge_score,
    incremental_edge_score,
    n_edges,
    n_vertices,
    suff_stat,
)
from .gibbs import MarkovSample, gibbs_step, run_chain, sample_dataset
from .mcobj import (
    LowEffectiveSampleWarning,
    McObjective,
    WeightDegeneracyError,
    mc_grad,
    mc_hessian,
    mc_nll,
)
from .oracle import (
    ChainConstants,
    TheoremReport,
    cone_factor,
    estimation_error_bound,
    exact_nll_grad_hess,
    gibbs_spectral_constants,
    importance_ratio_bound,
    log_norming_constant,
    norming_constant,
    theorem_report,
)
from .path import (
    PathResult,
    SelectionMetrics,
    lambda_grid_from_c1,
    lambda_max,
    run_path,
    run_pl_path,
    selection_metrics,
    threshold_support,
)
from .pseudo import PlObjective, conditional_prob, pl_grad, pl_nll
from .rng import RngSeed
from .solver import (
    FitResult,
    SolverDivergenceError,
    SolverOptions,
    fista,
    kkt_violation,
    soft_threshold,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ChainConstants",
    "EdgeIndex",
    "FitResult",
    "LowEffectiveSampleWarning",
    "MarkovSample",
    "McObjective",
    "PathResult",
    "PlObjective",
    "RngSeed",
    "SelectionMetrics",
    "SolverDivergenceError",
    "SolverOptions",
    "TheoremReport",
    "WeightDegeneracyError",
    "cone_factor",
    "conditional_prob",
    "edge_index",
    "edge_pair",
    "edge_score",
    "estimation_error_bound",
    "exact_nll_grad_hess",
    "fista",
    "gibbs_spectral_constants",
    "gibbs_step",
    "importance_ratio_bound",
    "incremental_edge_score",
    "kkt_violation",
    "lambda_grid_from_c1",
    "lambda_max",
    "log_norming_constant",
    "mc_grad",
    "mc_hessian",
    "mc_nll",
    "n_edges",
    "n_vertices",
    "norming_constant",
    "pl_grad",
    "pl_nll",
    "run_chain",
    "run_path",
    "run_pl_path",
    "sample_dataset",
    "selection_metrics",
    "soft_threshold",
    "suff_stat",
    "theorem_report",
    "threshold_support",
]
