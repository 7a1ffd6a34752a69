"""Feature selection on incomplete datasets.

The pipeline alternates a feature-importance-weighted ensemble matrix
completion stage with a mean-distance relief weight-learning stage, and ships
with the baseline imputers, missingness injectors and cross-validation
harness needed to benchmark it.
"""

from .dataset import (IncompleteDataset, FoldSplit, NormalizationParams,
                      apply_normalizer, fit_normalizer, load_csv, save_csv,
                      stratified_folds)
from .errors import NumericalError
from .evaluation import (EvalRecord, EvalReport, WilcoxonResult, accuracy_curve,
                         knn_classify, run_protocol, wilcoxon_signed_rank)
from .ewmc import (EwmcConfig, MStageResult, normalize_weights, objective,
                   project_observed, run_m_stage, solve_g, solve_h)
from .framework import FrameworkConfig, FrameworkResult, impute_test_set, run
from .imputers import (ImputationEnsemble, ImputerConfig, build_ensemble, impute,
                       impute_em, impute_knn, impute_mean, impute_svd)
from .missingness import Mechanism, MissingSpec, inject, inject_mcar, inject_mnar
from .relief import (NeighborSets, ReliefConfig, average_distances, diff,
                     mu_relief_a, rank_features, relieff)

__all__ = [
    "IncompleteDataset", "FoldSplit", "NormalizationParams", "apply_normalizer",
    "fit_normalizer", "load_csv", "save_csv", "stratified_folds",
    "NumericalError",
    "EvalRecord", "EvalReport", "WilcoxonResult", "accuracy_curve", "knn_classify",
    "run_protocol", "wilcoxon_signed_rank",
    "EwmcConfig", "MStageResult", "normalize_weights", "objective", "project_observed",
    "run_m_stage", "solve_g", "solve_h",
    "FrameworkConfig", "FrameworkResult", "impute_test_set", "run",
    "ImputationEnsemble", "ImputerConfig", "build_ensemble", "impute", "impute_em",
    "impute_knn", "impute_mean", "impute_svd",
    "Mechanism", "MissingSpec", "inject", "inject_mcar", "inject_mnar",
    "NeighborSets", "ReliefConfig", "average_distances", "diff", "mu_relief_a",
    "rank_features", "relieff",
]
