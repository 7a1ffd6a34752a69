"""Relief-style feature weight learning on complete matrices.

Two algorithms live here. The mean-distance variant updates every weight from
the full hit set and full per-class miss sets of a sample, using absolute
deviations from the mean hit/miss distance:

    v_l -= (1/|H_i|) sum_{j in H_i}  diff(x_i, x_j, l) |d_ij - mean_H|
    v_l += sum_{c != y_i} (1/n_c) sum_{j in M_ic} diff(x_i, x_j, l) |d_ij - mean_Mc|

The classical baseline uses k nearest hits/misses with prior weighting
P(c) / (1 - P(y_i)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ReliefConfig:
    iterations: int | None = None   # None: every sample exactly once
    seed: int = 0
    relieff_k: int = 10

    def __post_init__(self):
        if self.iterations is not None and self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.relieff_k < 1:
            raise ValueError("relieff_k must be at least 1")


@dataclass(frozen=True)
class NeighborSets:
    hit_set: np.ndarray
    miss_sets: dict[int, np.ndarray]


def neighbor_sets(i: int, labels: np.ndarray) -> NeighborSets:
    """Same-class samples (excluding i) and per-class index lists for the rest."""
    labels = np.asarray(labels)
    hit = np.flatnonzero(labels == labels[i])
    hit = hit[hit != i]
    misses = {int(c): np.flatnonzero(labels == c)
              for c in np.unique(labels) if c != labels[i]}
    return NeighborSets(hit_set=hit, miss_sets=misses)


def diff(xi: np.ndarray, xj: np.ndarray, l: int, ranges: tuple[np.ndarray, np.ndarray],
         is_discrete: np.ndarray | None = None) -> float:
    """Per-feature dissimilarity in [0, 1].

    Continuous features: |xi - xj| / (max - min), zero when the range is
    degenerate. Discrete features: 0/1 equality indicator.
    """
    lo, hi = ranges
    if is_discrete is not None and is_discrete[l]:
        return 0.0 if xi[l] == xj[l] else 1.0
    span = hi[l] - lo[l]
    if span <= 0:
        return 0.0
    return float(abs(xi[l] - xj[l]) / span)


def _feature_ranges(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return x.min(axis=0), x.max(axis=0)


def _diff_matrix(x: np.ndarray, i: int, spans: np.ndarray) -> np.ndarray:
    """diff(x_i, x_j, l) for all j, l at once (continuous features)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.abs(x - x[i]) / spans
    return np.where(spans > 0, out, 0.0)


def _pairwise_distances(x: np.ndarray) -> np.ndarray:
    sq = (x ** 2).sum(axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    return np.sqrt(np.clip(d2, 0.0, None))


def average_distances(i: int, x: np.ndarray, labels: np.ndarray) -> tuple[float | None, dict[int, float]]:
    """Mean Euclidean distance from x_i to its hit set and to each miss set.

    Returns None for the hit mean when the class of x_i is a singleton.
    """
    x = np.asarray(x, dtype=float)
    sets = neighbor_sets(i, labels)
    dist = np.sqrt(((x - x[i]) ** 2).sum(axis=1))
    d_hit = float(dist[sets.hit_set].mean()) if sets.hit_set.size else None
    d_miss = {c: float(dist[idx].mean()) for c, idx in sets.miss_sets.items()}
    return d_hit, d_miss


def _visit_order(n: int, cfg: ReliefConfig) -> np.ndarray:
    """Seeded sampling without replacement, reshuffling per full pass."""
    iterations = n if cfg.iterations is None else cfg.iterations
    rng = np.random.default_rng(cfg.seed)
    order = []
    while len(order) < iterations:
        order.extend(rng.permutation(n).tolist())
    return np.asarray(order[:iterations])


def mu_relief_a(x: np.ndarray, labels: np.ndarray,
                cfg: ReliefConfig = ReliefConfig()) -> np.ndarray:
    """Mean-distance relief weights from all hits and misses of each visited sample.

    Weights start at one and are returned raw (possibly negative); callers
    decide how to post-process.
    """
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    n, d = x.shape
    if n < 2:
        raise ValueError("need at least two samples")
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    class_count = dict(zip(classes.tolist(), counts.tolist()))
    lo, hi = _feature_ranges(x)
    spans = hi - lo
    dist = _pairwise_distances(x)
    v = np.ones(d)
    for i in _visit_order(n, cfg):
        contrib = np.zeros(n)
        hits = labels == labels[i]
        hits[i] = False
        n_hits = int(hits.sum())
        if n_hits > 0:
            d_hit = dist[i, hits].mean()
            contrib[hits] = -np.abs(dist[i, hits] - d_hit) / n_hits
        for c in classes:
            if c == labels[i]:
                continue
            members = labels == c
            d_miss = dist[i, members].mean()
            contrib[members] = np.abs(dist[i, members] - d_miss) / class_count[int(c)]
        v += _diff_matrix(x, i, spans).T @ contrib
    return v


def relieff(x: np.ndarray, labels: np.ndarray,
            cfg: ReliefConfig = ReliefConfig()) -> np.ndarray:
    """Classical relief weights with k nearest hits and misses.

    The miss contribution of class c is weighted by P(c) / (1 - P(y_i)).
    k is truncated per class when fewer neighbors exist; neighbor ties break
    on the lower row index.
    """
    x = np.asarray(x, dtype=float)
    labels = np.asarray(labels)
    n, d = x.shape
    if n < 2:
        raise ValueError("need at least two samples")
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise ValueError("need at least two classes")
    priors = {int(c): cnt / n for c, cnt in zip(classes, counts)}
    lo, hi = _feature_ranges(x)
    spans = hi - lo
    dist = _pairwise_distances(x)
    order = _visit_order(n, cfg)
    m = len(order)
    v = np.zeros(d)
    for i in order:
        diffs = _diff_matrix(x, i, spans)
        hits = np.flatnonzero(labels == labels[i])
        hits = hits[hits != i]
        if hits.size:
            k = min(cfg.relieff_k, hits.size)
            nearest = hits[np.argsort(dist[i, hits], kind="stable")[:k]]
            v -= diffs[nearest].mean(axis=0) / m
        denom = 1.0 - priors[int(labels[i])]
        for c in classes:
            if c == labels[i]:
                continue
            members = np.flatnonzero(labels == c)
            k = min(cfg.relieff_k, members.size)
            nearest = members[np.argsort(dist[i, members], kind="stable")[:k]]
            v += (priors[int(c)] / denom) * diffs[nearest].mean(axis=0) / m
    return v


def rank_features(v: np.ndarray) -> np.ndarray:
    """Feature indices sorted by weight descending, ties by ascending index."""
    v = np.asarray(v)
    return np.argsort(-v, kind="stable")
