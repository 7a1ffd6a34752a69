"""Weighted ensemble matrix completion by alternating closed-form ridge updates.

The completion stage minimizes, over a rank-r factorization Z = G H,

    (1/m) sum_i ||G H - X_i||_F^2
    + ||(G H - Xhat) Diag(v)||_F^2
    + gamma (||G||_F^2 + ||H||_F^2)

where the X_i are baseline imputations, v holds per-feature importance
weights, and Xhat carries the observed values with the current completion at
the missing cells. Both half-steps decompose into independent r x r ridge
systems with closed-form solutions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .dataset import IncompleteDataset
from .errors import NumericalError
from .imputers import ImputationEnsemble


@dataclass(frozen=True)
class EwmcConfig:
    rank: int = 5
    gamma: float = 20.0
    eta: float = 0.1
    max_inner_iter: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.rank <= 0 or self.gamma <= 0 or self.eta <= 0 or self.max_inner_iter <= 0:
            raise ValueError("rank, gamma, eta and max_inner_iter must be positive")


@dataclass
class MStageResult:
    z: np.ndarray
    objective_trace: np.ndarray
    converged: bool

    @property
    def iterations(self) -> int:
        return len(self.objective_trace)


def normalize_weights(v: np.ndarray) -> np.ndarray:
    """Prepare learned feature weights for the completion stage.

    Negative entries mark counter-productive features and are clamped to 0;
    the positive part is kept at its raw scale because the squared weights
    must stay large relative to gamma for the data terms to survive the
    regularizer. Falls back to all-ones when nothing is positive.
    """
    v = np.asarray(v, dtype=float)
    clamped = np.clip(v, 0.0, None)
    if clamped.max() <= 0.0:
        return np.ones_like(clamped)
    return clamped


def project_observed(data: IncompleteDataset, z: np.ndarray) -> np.ndarray:
    """Observed cells from the dataset, missing cells from the completion z."""
    if z.shape != data.values.shape:
        raise ValueError(f"shape mismatch: {z.shape} vs {data.values.shape}")
    return np.where(data.mask, data.values, z)


def objective(g: np.ndarray, h: np.ndarray, x_hat: np.ndarray,
              ensemble: ImputationEnsemble, v: np.ndarray, gamma: float) -> float:
    """Value of the completion loss at (g, h) for a fixed target x_hat."""
    z = g @ h
    ens = np.mean([((z - member) ** 2).sum() for member in ensemble.members])
    weighted = (((z - x_hat) * v) ** 2).sum()
    reg = gamma * ((g ** 2).sum() + (h ** 2).sum())
    return float(ens + weighted + reg)


def solve_h(g: np.ndarray, x_hat: np.ndarray, ensemble: ImputationEnsemble,
            v: np.ndarray, gamma: float) -> np.ndarray:
    """Exact minimizer over H with G fixed.

    Column q solves [(v_q^2 + 1) G^T G + gamma I] h = v_q^2 G^T xhat_q
    + G^T xbar_q. Diagonalizing G^T G once solves all d columns since they
    share eigenvectors.
    """
    v2 = np.asarray(v, dtype=float) ** 2
    b = g.T @ g
    try:
        lam, u = np.linalg.eigh(b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("eigendecomposition of G^T G failed") from exc
    rhs = g.T @ (x_hat * v2 + ensemble.mean())
    denom = np.outer(lam, v2 + 1.0) + gamma
    if (denom <= 0).any():
        raise NumericalError("singular column system in the H update")
    return u @ ((u.T @ rhs) / denom)


def solve_g(h: np.ndarray, x_hat: np.ndarray, ensemble: ImputationEnsemble,
            v: np.ndarray, gamma: float) -> np.ndarray:
    """Exact minimizer over G with H fixed.

    Every row shares the system matrix H Diag(v)^2 H^T + gamma I + H H^T,
    factorized once by Cholesky.
    """
    v2 = np.asarray(v, dtype=float) ** 2
    r = h.shape[0]
    hv = h * v2
    system = hv @ h.T + gamma * np.eye(r) + h @ h.T
    rhs = x_hat @ hv.T + ensemble.mean() @ h.T
    try:
        chol = scipy.linalg.cho_factor(system)
        return scipy.linalg.cho_solve(chol, rhs.T).T
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError("row system in the G update is not positive definite") from exc


def run_m_stage(data: IncompleteDataset, ensemble: ImputationEnsemble,
                v: np.ndarray, cfg: EwmcConfig) -> MStageResult:
    """Alternate the H and G updates until the objective stabilizes.

    G starts as a seeded random matrix with orthonormal columns. The fit
    target is refreshed from the current completion before every H update;
    the first pass, where no completion exists yet, targets the ensemble mean
    at the missing cells. The trace records the objective evaluated with the
    refreshed target after each full pass, and iteration stops when
    consecutive values differ by less than eta.

    The returned matrix carries the exact observed values; only missing cells
    come from the factorization.
    """
    n, d = data.values.shape
    r = min(cfg.rank, n, d)
    rng = np.random.default_rng(cfg.seed)
    g = np.linalg.qr(rng.standard_normal((n, r)))[0]
    h: np.ndarray | None = None
    x_hat = project_observed(data, ensemble.mean())
    trace = []
    converged = False
    for _ in range(cfg.max_inner_iter):
        if h is not None:
            x_hat = project_observed(data, g @ h)
        h = solve_h(g, x_hat, ensemble, v, cfg.gamma)
        g = solve_g(h, x_hat, ensemble, v, cfg.gamma)
        x_hat_next = project_observed(data, g @ h)
        trace.append(objective(g, h, x_hat_next, ensemble, v, cfg.gamma))
        if len(trace) > 1 and abs(trace[-1] - trace[-2]) < cfg.eta:
            converged = True
            break
    z = project_observed(data, g @ h)
    return MStageResult(z=z, objective_trace=np.asarray(trace), converged=converged)
