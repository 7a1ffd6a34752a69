"""Baseline imputers producing the complete matrices consumed by the completion stage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import IncompleteDataset
from .errors import NumericalError


@dataclass(frozen=True)
class ImputerConfig:
    knn_k: int = 5
    em_max_iter: int = 50
    em_tol: float = 1e-4
    em_ridge: float = 1e-6
    svd_rank: int = 5
    svd_max_iter: int = 100
    svd_tol: float = 1e-4

    def __post_init__(self):
        for name in ("knn_k", "em_max_iter", "em_tol", "em_ridge",
                     "svd_rank", "svd_max_iter", "svd_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ImputationEnsemble:
    """The complete matrices produced by the configured baseline imputers."""

    members: tuple[np.ndarray, ...]
    method_tags: tuple[str, ...]

    def __post_init__(self):
        if len(self.members) != len(self.method_tags):
            raise ValueError("one tag per member required")
        if not self.members:
            raise ValueError("ensemble must have at least one member")
        shape = self.members[0].shape
        if any(m.shape != shape for m in self.members):
            raise ValueError("ensemble members must share dimensions")

    @property
    def size(self) -> int:
        return len(self.members)

    def mean(self) -> np.ndarray:
        return np.mean(self.members, axis=0)


def impute_mean(data: IncompleteDataset) -> np.ndarray:
    """Fill each missing cell with its column's observed mean (0 if none observed)."""
    cnt = data.mask.sum(axis=0)
    total = np.where(data.mask, data.values, 0.0).sum(axis=0)
    mu = np.divide(total, cnt, out=np.zeros(data.n_features), where=cnt > 0)
    return np.where(data.mask, data.values, mu)


def partial_distances(a: np.ndarray, mask_a: np.ndarray,
                      b: np.ndarray, mask_b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Squared distances over mutually observed features, rescaled by d/|shared|.

    Returns (distances, shared counts); pairs with no shared feature get inf.
    """
    d = a.shape[1]
    az = np.where(mask_a, a, 0.0)
    bz = np.where(mask_b, b, 0.0)
    ma = mask_a.astype(float)
    mb = mask_b.astype(float)
    sq = (az ** 2) @ mb.T + ma @ (bz ** 2).T - 2.0 * (az @ bz.T)
    shared = ma @ mb.T
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = sq * d / shared
    dist[shared == 0] = np.inf
    # guard against tiny negative values from cancellation
    np.clip(dist, 0.0, None, out=dist)
    return dist, shared


def impute_knn(data: IncompleteDataset, cfg: ImputerConfig = ImputerConfig()) -> np.ndarray:
    """Partial-distance kNN imputation.

    For each incomplete row, rows are ranked by rescaled partial distance; the
    k nearest that observe the target feature vote by unweighted mean.
    Equidistant candidates are taken in row-index order. Falls back to the
    column mean when no candidate observes the feature.
    """
    out = data.values.copy()
    fallback = impute_mean(data)
    dist, _ = partial_distances(data.values, data.mask, data.values, data.mask)
    np.fill_diagonal(dist, np.inf)
    for i in np.flatnonzero(~data.mask.all(axis=1)):
        di = dist[i]
        for q in np.flatnonzero(~data.mask[i]):
            cand = np.flatnonzero(data.mask[:, q] & np.isfinite(di))
            if cand.size == 0:
                out[i, q] = fallback[i, q]
                continue
            nearest = cand[np.argsort(di[cand], kind="stable")[:cfg.knn_k]]
            out[i, q] = data.values[nearest, q].mean()
    return out


def _gaussian_fill(values: np.ndarray, mask: np.ndarray, mu: np.ndarray,
                   cov: np.ndarray, ridge: float) -> tuple[np.ndarray, np.ndarray]:
    """Conditional-mean fill of missing coordinates for a Gaussian model.

    Also accumulates the conditional covariance of the filled coordinates,
    needed to keep the covariance update unbiased.
    """
    n, d = values.shape
    filled = values.copy()
    correction = np.zeros((d, d))
    patterns: dict[bytes, list[int]] = {}
    for i in range(n):
        patterns.setdefault(mask[i].tobytes(), []).append(i)
    for key, idx in patterns.items():
        obs = np.frombuffer(key, dtype=bool)
        mis = ~obs
        if not mis.any():
            continue
        rows = np.asarray(idx)
        if not obs.any():
            filled[np.ix_(rows, mis)] = mu[mis]
            correction[np.ix_(mis, mis)] += len(rows) * cov[np.ix_(mis, mis)]
            continue
        coo = cov[np.ix_(obs, obs)] + ridge * np.eye(int(obs.sum()))
        cmo = cov[np.ix_(mis, obs)]
        sol = np.linalg.solve(coo, (values[np.ix_(rows, obs)] - mu[obs]).T)
        filled[np.ix_(rows, mis)] = mu[mis] + (cmo @ sol).T
        cond = cov[np.ix_(mis, mis)] - cmo @ np.linalg.solve(coo, cmo.T)
        correction[np.ix_(mis, mis)] += len(rows) * cond
    return filled, correction


def fit_gaussian(data: IncompleteDataset,
                 cfg: ImputerConfig = ImputerConfig()) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fit a single multivariate Gaussian to partially observed rows by EM.

    Returns (filled matrix, mean, covariance). The covariance inversion is
    retried with a 10x larger ridge up to three times before giving up.
    """
    n, d = data.values.shape
    filled = impute_mean(data)
    mu = filled.mean(axis=0)
    cov = np.cov(filled, rowvar=False, bias=True).reshape(d, d) + cfg.em_ridge * np.eye(d)
    ridge = cfg.em_ridge
    for attempt in range(4):
        try:
            for _ in range(cfg.em_max_iter):
                filled, correction = _gaussian_fill(data.values, data.mask, mu, cov, ridge)
                mu_new = filled.mean(axis=0)
                centered = filled - mu_new
                cov_new = (centered.T @ centered + correction) / n + ridge * np.eye(d)
                delta = max(np.abs(mu_new - mu).max(), np.abs(cov_new - cov).max())
                mu, cov = mu_new, cov_new
                if delta < cfg.em_tol:
                    break
            return filled, mu, cov
        except np.linalg.LinAlgError:
            ridge *= 10.0
    raise NumericalError("EM covariance update failed to stay invertible")


def impute_em(data: IncompleteDataset, cfg: ImputerConfig = ImputerConfig()) -> np.ndarray:
    """EM imputation: missing cells get their Gaussian conditional means."""
    filled, _, _ = fit_gaussian(data, cfg)
    return filled


def impute_svd(data: IncompleteDataset, cfg: ImputerConfig = ImputerConfig()) -> np.ndarray:
    """Iterative low-rank completion: fill, truncate, refill the missing cells.

    Starts from column means and repeats "best rank-r approximation, then
    overwrite only missing cells" until the missing-cell change is below
    svd_tol in Frobenius norm.
    """
    rank = min(cfg.svd_rank, min(data.values.shape))
    filled = impute_mean(data)
    missing = ~data.mask
    if not missing.any():
        return filled
    for _ in range(cfg.svd_max_iter):
        u, s, vt = np.linalg.svd(filled, full_matrices=False)
        approx = (u[:, :rank] * s[:rank]) @ vt[:rank]
        change = np.sqrt(((approx - filled)[missing] ** 2).sum())
        filled = np.where(data.mask, data.values, approx)
        if change < cfg.svd_tol:
            break
    return filled


_IMPUTERS = {
    "mean": impute_mean,
    "knn": impute_knn,
    "em": impute_em,
    "svd": impute_svd,
}

DEFAULT_ENSEMBLE_METHODS = ("em", "knn", "svd")


def impute(data: IncompleteDataset, method: str,
           cfg: ImputerConfig = ImputerConfig()) -> np.ndarray:
    try:
        fn = _IMPUTERS[method]
    except KeyError:
        raise ValueError(f"unknown imputer {method!r}; choose from {sorted(_IMPUTERS)}") from None
    if method == "mean":
        return fn(data)
    return fn(data, cfg)


def build_ensemble(data: IncompleteDataset,
                   methods=DEFAULT_ENSEMBLE_METHODS,
                   cfg: ImputerConfig = ImputerConfig()) -> ImputationEnsemble:
    if not methods:
        raise ValueError("methods must be non-empty")
    members = tuple(impute(data, m, cfg) for m in methods)
    return ImputationEnsemble(members, tuple(methods))
