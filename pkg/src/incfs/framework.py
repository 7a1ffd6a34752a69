"""Alternation of the completion stage and the weight-learning stage."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import IncompleteDataset
from .ewmc import EwmcConfig, normalize_weights, run_m_stage
from .imputers import DEFAULT_ENSEMBLE_METHODS, ImputationEnsemble, ImputerConfig, build_ensemble
from .relief import ReliefConfig, mu_relief_a, relieff

_SELECTORS = {
    "mu-reliefa": mu_relief_a,
    "relieff": relieff,
}


@dataclass(frozen=True)
class FrameworkConfig:
    ewmc: EwmcConfig = EwmcConfig()
    relief: ReliefConfig = ReliefConfig()
    delta: float = 0.01
    max_outer_iter: int = 20
    selector: str = "mu-reliefa"
    imputer_cfg: ImputerConfig = ImputerConfig()
    imputer_methods: tuple[str, ...] = DEFAULT_ENSEMBLE_METHODS

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.max_outer_iter < 1:
            raise ValueError("max_outer_iter must be at least 1")
        if self.selector not in _SELECTORS:
            raise ValueError(f"unknown selector {self.selector!r}; choose from {sorted(_SELECTORS)}")


@dataclass
class FrameworkResult:
    v: np.ndarray
    z: np.ndarray
    zeta_trace: np.ndarray
    outer_iters: int
    converged: bool
    m_stage_converged: list[bool] = field(default_factory=list)


def run(data: IncompleteDataset, ensemble: ImputationEnsemble,
        cfg: FrameworkConfig = FrameworkConfig()) -> FrameworkResult:
    """Alternate completion and weight learning until the weight norm stabilizes.

    Weights start at all-ones. After each weight-learning pass the squared
    norm zeta of the raw weights is compared with the previous value; the
    loop stops when the change drops below delta (an infinite delta therefore
    stops after the first full pass) or when max_outer_iter is hit.
    """
    selector = _SELECTORS[cfg.selector]
    v = np.ones(data.n_features)
    zeta_prev = -math.inf
    zeta_trace: list[float] = []
    m_flags: list[bool] = []
    z = None
    converged = False
    outer = 0
    for outer in range(1, cfg.max_outer_iter + 1):
        stage = run_m_stage(data, ensemble, normalize_weights(v), cfg.ewmc)
        m_flags.append(stage.converged)
        z = stage.z
        v = selector(z, data.labels, cfg.relief)
        zeta = float((v ** 2).sum())
        zeta_trace.append(zeta)
        if abs(zeta - zeta_prev) < cfg.delta or math.isinf(cfg.delta):
            converged = True
            break
        zeta_prev = zeta
    return FrameworkResult(v=v, z=z, zeta_trace=np.asarray(zeta_trace),
                           outer_iters=outer, converged=converged,
                           m_stage_converged=m_flags)


def impute_test_set(train: IncompleteDataset, test: IncompleteDataset, v: np.ndarray,
                    cfg: FrameworkConfig = FrameworkConfig(),
                    methods: tuple[str, ...] | None = None) -> np.ndarray:
    """Complete a test matrix with weights learned on the training matrix.

    Test rows are stacked beneath the training rows, the baseline ensemble is
    rebuilt on the stacked matrix, and a single completion stage runs with the
    weights held fixed. Labels are never consulted. Returns the test rows.
    """
    if test.n_features != train.n_features:
        raise ValueError("train and test must share the feature count")
    stacked = IncompleteDataset(
        values=np.vstack([train.values, test.values]),
        mask=np.vstack([train.mask, test.mask]),
        labels=np.concatenate([np.zeros(train.n_samples, dtype=int),
                               np.zeros(test.n_samples, dtype=int)]),
        feature_names=train.feature_names,
    )
    ensemble = build_ensemble(stacked, methods or cfg.imputer_methods, cfg.imputer_cfg)
    stage = run_m_stage(stacked, ensemble, normalize_weights(v), cfg.ewmc)
    return stage.z[train.n_samples:]
