"""Scoring and cross-validated selection of extreme-quantile predictors."""

from .assessment import (
    CvPlan,
    FoldAssignment,
    InfeasiblePlanError,
    METHOD_QS,
    METHOD_SCV1,
    METHOD_SCV2,
    ScoreReport,
    conventional_assess,
    derive_cv_params,
    fold_seed,
    matched_alphas,
    partition_folds,
    scv1,
    scv2,
)
from .benchmark import (
    SimulationConfig,
    SimulationResult,
    median_baseline,
    random_baseline,
    run_simulation,
)
from .distributions import DataModel, Gamma, Gev, Gpd, Uniform, parse_model
from .gpdfit import (
    FitFailureError,
    InsufficientDataError,
    MleFit,
    fit_gpd_mle,
    gpd_log_likelihood,
)
from .predictors import (
    GpdFit,
    Prediction,
    PredictorSpec,
    SET_A_COUNTS,
    SET_B_LEVELS,
    SpecInfeasibleError,
    empirical_quantile,
    empirical_spec,
    gev_quantile_predict,
    gpd_quantile,
    gpd_quantile_predict,
    predict,
    predictor_set,
    set_a,
    set_b,
)
from .scoring import average_score, check_loss

__version__ = "0.1.0"

__all__ = [
    "CvPlan",
    "DataModel",
    "FitFailureError",
    "FoldAssignment",
    "Gamma",
    "Gev",
    "Gpd",
    "GpdFit",
    "InfeasiblePlanError",
    "InsufficientDataError",
    "METHOD_QS",
    "METHOD_SCV1",
    "METHOD_SCV2",
    "MleFit",
    "Prediction",
    "PredictorSpec",
    "ScoreReport",
    "SET_A_COUNTS",
    "SET_B_LEVELS",
    "SimulationConfig",
    "SimulationResult",
    "SpecInfeasibleError",
    "Uniform",
    "average_score",
    "check_loss",
    "conventional_assess",
    "derive_cv_params",
    "empirical_quantile",
    "empirical_spec",
    "fit_gpd_mle",
    "fold_seed",
    "gev_quantile_predict",
    "gpd_log_likelihood",
    "gpd_quantile",
    "gpd_quantile_predict",
    "matched_alphas",
    "median_baseline",
    "parse_model",
    "partition_folds",
    "predict",
    "predictor_set",
    "random_baseline",
    "run_simulation",
    "scv1",
    "scv2",
    "set_a",
    "set_b",
]
