"""Streaming one-step-ahead prediction with a weighted Gaussian-process
mixture, robust to outliers and change points."""

from .engine import (
    ChangeBucket,
    Classification,
    EngineConfig,
    EngineState,
    Mode,
    StepOutput,
    TrainingWindow,
    Verdict,
    classify,
    initialize,
    predict_next,
    refresh_mean_periodic,
    step,
)
from .fit import FitError, FitResult, fit_template
from .gp import (
    VAR_FLOOR,
    Hyperparameters,
    KernelKind,
    KernelSpec,
    MeanFunction,
    NumericalError,
    PredictiveDistribution,
    covariance_matrix,
    gp_predict,
    kernel_eval,
    lml_gradient,
    log_marginal_likelihood,
    noisy_covariance,
)
from .harness import BenchResult, InputError, RunResult, bench, load_csv, run
from .metrics import (
    DegenerateDataError,
    NormalizationStats,
    RunMetrics,
    compute_stats,
    evaluate,
)
from .mixture import (
    WEIGHT_FLOOR,
    FusedPrediction,
    ModelSet,
    VariantFactors,
    build_model_set,
    fuse_poe,
    fuse_unweighted_poe,
    model_likelihood,
    predictive_weights,
    update_weights,
)

__version__ = "0.1.0"

__all__ = [
    "ChangeBucket",
    "Classification",
    "EngineConfig",
    "EngineState",
    "Mode",
    "StepOutput",
    "TrainingWindow",
    "Verdict",
    "classify",
    "initialize",
    "predict_next",
    "refresh_mean_periodic",
    "step",
    "FitError",
    "FitResult",
    "fit_template",
    "VAR_FLOOR",
    "Hyperparameters",
    "KernelKind",
    "KernelSpec",
    "MeanFunction",
    "NumericalError",
    "PredictiveDistribution",
    "covariance_matrix",
    "gp_predict",
    "kernel_eval",
    "lml_gradient",
    "log_marginal_likelihood",
    "noisy_covariance",
    "BenchResult",
    "InputError",
    "RunResult",
    "bench",
    "load_csv",
    "run",
    "DegenerateDataError",
    "NormalizationStats",
    "RunMetrics",
    "compute_stats",
    "evaluate",
    "WEIGHT_FLOOR",
    "FusedPrediction",
    "ModelSet",
    "VariantFactors",
    "build_model_set",
    "fuse_poe",
    "fuse_unweighted_poe",
    "model_likelihood",
    "predictive_weights",
    "update_weights",
]
