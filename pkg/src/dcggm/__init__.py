"""Sparse Gaussian graphical model estimation with a cardinality budget.

The core estimator bounds the number of nonzero precision entries through
a largest-K-norm penalty solved by successive convex linearizations, each
of which is a graphical-lasso instance.  Graphical lasso, SCAD, and
adaptive-lasso estimators, synthetic ground-truth generators, and a
cross-validation / fixed-edge benchmark harness round out the package.
"""

from .dc import (
    DcOptions,
    DcSolution,
    DcTraceRow,
    constraint_gap,
    dc_fit,
    dc_objective,
    linearized_objective,
    select_eta,
    subgradient_matrix,
)
from .errors import (
    DcggmError,
    DimensionMismatch,
    EtaUnderflow,
    GenerationFailed,
    InvalidEdgeCount,
    InvalidFolds,
    InvalidK,
    NonConvergence,
    NotPositiveDefinite,
    NumericalError,
    ShrinkageFailed,
    ValidationError,
)
from .glasso import (
    GlassoOptions,
    GlassoSolution,
    glasso_fit,
    kkt_residual,
    lasso_cd,
    objective_penalized,
)
from .harness import (
    CalibrationResult,
    CvResult,
    MethodSettings,
    ResultRow,
    RunConfig,
    calibrate_edges,
    cross_validate,
    fit_method,
    k_grid,
    kfold_split,
    lambda_grid,
    lambda_max,
    run_benchmark,
    run_experiment1,
    run_experiment2,
)
from .linalg import (
    cholesky,
    frobenius_sq_diff,
    inv_pd,
    is_positive_definite,
    largest_k_norm,
    load_matrix_csv,
    log_det_pd,
    save_matrix_csv,
    soft_threshold,
    sym_matrix,
    topk_sign_subgradient,
)
from .metrics import ConfusionCounts, confusion, edge_support, f1_score, holdout_neg_loglik
from .penalties import (
    AdaptiveParams,
    ScadParams,
    adaptive_fit,
    adaptive_weights,
    scad_fit,
    scad_objective,
    scad_value,
    scad_weight,
)
from .synthetic import (
    Dataset,
    GroundTruth,
    gen_chain_precision,
    gen_random_precision,
    make_dataset,
    sample_covariance,
    sample_mvn,
    shrink_covariance,
    shrink_from_samples,
    shrinkage_weight,
)

__version__ = "0.1.0"
