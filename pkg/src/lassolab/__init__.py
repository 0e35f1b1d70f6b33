"""Verification lab for design-dependent sparse linear regression."""

__version__ = "0.1.0"

from lassolab._accel import backend_name  # noqa: E402
from lassolab.designs import (  # noqa: E402
    AlphaInstance,
    DenseDesign,
    DiagonalDesign,
    make_alpha_instance,
    min_certified_B,
    random_dense_design,
    sample_observation,
)
from lassolab.estimators import (  # noqa: E402
    EstimatorSpec,
    lasso_diagonal,
    lift_sequence_estimator,
    ols,
    oracle_lasso,
    stols,
    stols_eta,
)
from lassolab.theory import ProblemParams, alpha_star, minimax_rate, worst_theta  # noqa: E402

__all__ = [
    "AlphaInstance", "DenseDesign", "DiagonalDesign", "EstimatorSpec", "ProblemParams",
    "alpha_star", "backend_name", "lasso_diagonal", "lift_sequence_estimator", "make_alpha_instance",
    "min_certified_B", "minimax_rate", "ols", "oracle_lasso", "random_dense_design",
    "sample_observation", "stols", "stols_eta", "worst_theta",
]
