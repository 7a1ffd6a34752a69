"""Cross-validation protocol, nearest-neighbor classification and significance testing."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, replace

import numpy as np

from . import seeding
from .dataset import IncompleteDataset, apply_normalizer, fit_normalizer, stratified_folds
from .framework import FrameworkConfig, impute_test_set, run
from .imputers import build_ensemble, impute
from .missingness import MissingSpec, inject
from .relief import ReliefConfig, mu_relief_a, rank_features, relieff


def knn_classify(train_x: np.ndarray, train_y: np.ndarray,
                 test_x: np.ndarray, k: int) -> np.ndarray:
    """Majority vote among the k nearest training rows (Euclidean).

    Deterministic tie handling: equidistant neighbors are taken in row order;
    tied vote counts go to the class with the smaller summed neighbor
    distance, then to the smaller class id.
    """
    train_x = np.atleast_2d(np.asarray(train_x, dtype=float))
    test_x = np.atleast_2d(np.asarray(test_x, dtype=float))
    train_y = np.asarray(train_y)
    if train_x.shape[0] == 0:
        raise ValueError("empty training set")
    if k > train_x.shape[0]:
        raise ValueError(f"k={k} exceeds training size {train_x.shape[0]}")
    preds = np.empty(test_x.shape[0], dtype=train_y.dtype)
    for i, point in enumerate(test_x):
        dist = np.sqrt(((train_x - point) ** 2).sum(axis=1))
        nearest = np.argsort(dist, kind="stable")[:k]
        votes: dict[int, int] = {}
        sums: dict[int, float] = {}
        for j in nearest:
            c = int(train_y[j])
            votes[c] = votes.get(c, 0) + 1
            sums[c] = sums.get(c, 0.0) + float(dist[j])
        best = max(votes.values())
        tied = [c for c, cnt in votes.items() if cnt == best]
        tied.sort(key=lambda c: (sums[c], c))
        preds[i] = tied[0]
    return preds


def accuracy_curve(weights: np.ndarray, train_x: np.ndarray, train_y: np.ndarray,
                   test_x: np.ndarray, test_y: np.ndarray, k: int) -> np.ndarray:
    """Accuracy for every prefix of the ranked feature list (sizes 1..d)."""
    order = rank_features(weights)
    test_y = np.asarray(test_y)
    accs = []
    for s in range(1, len(order) + 1):
        cols = order[:s]
        pred = knn_classify(train_x[:, cols], train_y, test_x[:, cols], k)
        accs.append(float((pred == test_y).mean()))
    return np.asarray(accs)


@dataclass(frozen=True)
class EvalRecord:
    dataset: str
    mechanism: str
    rate: float
    method: str
    run: int
    fold: int
    feature_count: int
    accuracy: float


@dataclass
class EvalReport:
    records: list[EvalRecord]

    def methods(self) -> list[str]:
        return sorted({r.method for r in self.records})

    def mean_accuracy(self, method: str) -> float:
        """Table-style cell: mean over feature counts, then folds, then runs."""
        per_run: dict[int, dict[int, list[float]]] = {}
        for r in self.records:
            if r.method != method:
                continue
            per_run.setdefault(r.run, {}).setdefault(r.fold, []).append(r.accuracy)
        run_means = [np.mean([np.mean(accs) for accs in folds.values()])
                     for folds in per_run.values()]
        return float(np.mean(run_means))

    def curve(self, method: str) -> np.ndarray:
        """Mean accuracy per feature count across folds and runs."""
        by_count: dict[int, list[float]] = {}
        for r in self.records:
            if r.method == method:
                by_count.setdefault(r.feature_count, []).append(r.accuracy)
        return np.asarray([np.mean(by_count[c]) for c in sorted(by_count)])

    def to_rows(self) -> list[list]:
        return [[r.dataset, r.mechanism, r.rate, r.method, r.run, r.fold,
                 r.feature_count, r.accuracy] for r in self.records]

    HEADER = ["dataset", "mechanism", "rate", "method", "run", "fold",
              "feature_count", "accuracy"]


def _parse_pipeline(method: str) -> tuple[str, str]:
    """Split a pipeline id like 'ewmc+mu-reliefa' into (imputer, selector)."""
    if "+" not in method:
        raise ValueError(f"pipeline id {method!r} must look like '<imputer>+<selector>'")
    imputer, selector = method.split("+", 1)
    if selector not in ("mu-reliefa", "relieff"):
        raise ValueError(f"unknown selector {selector!r} in {method!r}")
    return imputer, selector


def _stacked(train: IncompleteDataset, test: IncompleteDataset) -> IncompleteDataset:
    return IncompleteDataset(
        values=np.vstack([train.values, test.values]),
        mask=np.vstack([train.mask, test.mask]),
        labels=np.zeros(train.n_samples + test.n_samples, dtype=int),
        feature_names=train.feature_names,
    )


def _run_pipeline(method: str, train: IncompleteDataset, test: IncompleteDataset,
                  cfg: FrameworkConfig, seeds: dict[str, int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fit one pipeline on the train fold; return (weights, train matrix, test matrix)."""
    imputer, selector = _parse_pipeline(method)
    relief_cfg = replace(cfg.relief, seed=seeds["relief"])
    if imputer == "ewmc":
        fit_cfg = replace(cfg, selector=selector, relief=relief_cfg,
                          ewmc=replace(cfg.ewmc, seed=seeds["g_init"]))
        ensemble = build_ensemble(train, fit_cfg.imputer_methods, fit_cfg.imputer_cfg)
        result = run(train, ensemble, fit_cfg)
        test_cfg = replace(fit_cfg, ewmc=replace(fit_cfg.ewmc, seed=seeds["test_impute"]))
        test_z = impute_test_set(train, test, result.v, test_cfg)
        return result.v, result.z, test_z
    select = mu_relief_a if selector == "mu-reliefa" else relieff
    train_z = impute(train, imputer, cfg.imputer_cfg)
    weights = select(train_z, train.labels, relief_cfg)
    test_z = impute(_stacked(train, test), imputer, cfg.imputer_cfg)[train.n_samples:]
    return weights, train_z, test_z


def run_protocol(data: IncompleteDataset, spec: MissingSpec | None, methods: list[str],
                 runs: int = 10, folds: int = 5, seed: int = 0,
                 cfg: FrameworkConfig = FrameworkConfig(), k: int = 5,
                 dataset_name: str = "data") -> EvalReport:
    """Repeated stratified cross-validation over ranked-feature prefixes.

    Complete datasets require a missingness spec, which is applied to the
    train and test portions of every fold independently; datasets that
    already contain missing values are evaluated as-is (spec must be None).
    Each pipeline is fit on the (normalized) train fold and scored on the
    imputed test fold at every feature-prefix size.
    """
    if spec is not None and not data.is_complete:
        raise ValueError("spec given but the dataset already has missing values")
    if spec is None and data.is_complete:
        raise ValueError("complete dataset requires a missingness spec")
    mech = spec.mechanism.value if spec is not None else "real"
    rate = spec.rate if spec is not None else float((~data.mask).mean())
    records: list[EvalRecord] = []
    for run_id in range(runs):
        fold_seed = seeding.child_seed(seed, run_id, 0, seeding.STAGE_FOLDS)
        for split in stratified_folds(data.labels, folds, fold_seed, run_id=run_id):
            train = data.subset(split.train_indices)
            test = data.subset(split.test_indices)
            if spec is not None:
                train = inject(train, dataclasses.replace(
                    spec, seed=seeding.child_seed(seed, run_id, split.fold_id,
                                                  seeding.STAGE_INJECT_TRAIN)))
                test = inject(test, dataclasses.replace(
                    spec, seed=seeding.child_seed(seed, run_id, split.fold_id,
                                                  seeding.STAGE_INJECT_TEST)))
            params = fit_normalizer(train)
            train = apply_normalizer(train, params)
            test = apply_normalizer(test, params)
            seeds = {
                "g_init": seeding.child_seed(seed, run_id, split.fold_id, seeding.STAGE_G_INIT),
                "relief": seeding.child_seed(seed, run_id, split.fold_id, seeding.STAGE_RELIEF),
                "test_impute": seeding.child_seed(seed, run_id, split.fold_id,
                                                  seeding.STAGE_TEST_IMPUTE),
            }
            for method in methods:
                weights, train_z, test_z = _run_pipeline(method, train, test, cfg, seeds)
                curve = accuracy_curve(weights, train_z, train.labels, test_z, test.labels, k)
                for count, acc in enumerate(curve, start=1):
                    records.append(EvalRecord(dataset_name, mech, rate, method,
                                              run_id, split.fold_id, count, acc))
    return EvalReport(records)


@dataclass(frozen=True)
class WilcoxonResult:
    n_effective: int
    r_plus: float
    r_minus: float
    p_value: float


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_p(ranks: np.ndarray, r_plus: float, r_minus: float) -> float:
    """Two-sided exact p by counting sign assignments via subset-sum DP.

    Midranks are multiples of one half, so doubling them gives integers and
    the distribution of 2*R+ over all 2^n assignments is a subset-sum count.
    """
    scaled = np.rint(2.0 * ranks).astype(int)
    total = int(scaled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for s in scaled:
        shifted = np.zeros_like(counts)
        shifted[s:] = counts[:len(counts) - s]
        counts = counts + shifted
    lo = int(np.rint(2.0 * min(r_plus, r_minus)))
    hi = int(np.rint(2.0 * max(r_plus, r_minus)))
    p = (counts[:lo + 1].sum() + counts[hi:].sum()) / counts.sum()
    return float(min(1.0, p))


def _normal_p(ranks: np.ndarray, r_plus: float, n: int) -> float:
    """Two-sided normal approximation with tie and continuity corrections."""
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var -= (tie_counts ** 3 - tie_counts).sum() / 48.0
    if var <= 0:
        return 1.0
    dev = r_plus - mean
    dev -= 0.5 * np.sign(dev)
    z = dev / math.sqrt(var)
    return float(min(1.0, 2.0 * (1.0 - 0.5 * (1.0 + math.erf(abs(z) / math.sqrt(2.0))))))


def wilcoxon_signed_rank(a, b, exact_limit: int = 12) -> WilcoxonResult:
    """Two-sided signed-rank test on paired samples.

    Zero differences are dropped; absolute differences get midranks. The
    p-value is exact (full sign-assignment distribution) for small effective
    sizes and a tie/continuity-corrected normal approximation otherwise.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("a and b must be 1-D with equal length")
    if len(a) < 1:
        raise ValueError("need at least one pair")
    diffs = a - b
    diffs = diffs[diffs != 0]
    n = len(diffs)
    if n == 0:
        return WilcoxonResult(0, 0.0, 0.0, 1.0)
    ranks = _midranks(np.abs(diffs))
    r_plus = float(ranks[diffs > 0].sum())
    r_minus = float(ranks[diffs < 0].sum())
    if n <= exact_limit:
        p = _exact_p(ranks, r_plus, r_minus)
    else:
        p = _normal_p(ranks, r_plus, n)
    return WilcoxonResult(n, r_plus, r_minus, p)
