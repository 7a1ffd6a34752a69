"""Loading, normalization and fold splitting for labeled datasets with missing cells."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_MISSING_TOKENS = frozenset({"", "?", "NA"})


@dataclass(frozen=True)
class IncompleteDataset:
    """Feature matrix with an observation mask and integer class labels.

    ``mask[i, j]`` is True when cell (i, j) is observed; the stored value at
    unobserved cells is meaningless and must be ignored by all consumers.
    """

    values: np.ndarray
    mask: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        labels = np.asarray(self.labels, dtype=int)
        if values.ndim != 2:
            raise ValueError("values must be a 2-D matrix")
        if mask.shape != values.shape:
            raise ValueError(f"mask shape {mask.shape} != values shape {values.shape}")
        if labels.shape != (values.shape[0],):
            raise ValueError("labels must have one entry per row")
        if values.shape[0] and not mask.any(axis=1).all():
            bad = int(np.flatnonzero(~mask.any(axis=1))[0])
            raise ValueError(f"row {bad} has no observed features")
        names = tuple(self.feature_names) or tuple(f"f{j}" for j in range(values.shape[1]))
        if len(names) != values.shape[1]:
            raise ValueError("feature_names length must match the number of columns")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_features(self) -> int:
        return self.values.shape[1]

    @property
    def n_classes(self) -> int:
        return len(np.unique(self.labels))

    @property
    def n_missing(self) -> int:
        return int((~self.mask).sum())

    @property
    def is_complete(self) -> bool:
        return bool(self.mask.all())

    def subset(self, rows: np.ndarray) -> "IncompleteDataset":
        """Row-indexed view as a new dataset (used for fold extraction)."""
        rows = np.asarray(rows)
        return replace(self, values=self.values[rows], mask=self.mask[rows],
                       labels=self.labels[rows])


@dataclass(frozen=True)
class FoldSplit:
    train_indices: np.ndarray
    test_indices: np.ndarray
    fold_id: int
    run_id: int = 0


@dataclass(frozen=True)
class NormalizationParams:
    """Per-feature observed min/max; constant marks features with max == min."""

    minimum: np.ndarray
    maximum: np.ndarray
    constant: np.ndarray


def load_csv(path, label_column: str, missing_tokens=DEFAULT_MISSING_TOKENS) -> IncompleteDataset:
    """Read a labeled CSV with missing-value tokens into an IncompleteDataset.

    Labels are mapped to dense integers 0..C-1 in order of first appearance.
    A cell matching a missing token becomes mask-False; everything else must
    parse as a real number.
    """
    missing_tokens = frozenset(missing_tokens)
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ValueError(f"{path}: empty file") from None
            rows = [row for row in reader if row]
    except OSError as exc:
        raise ValueError(f"cannot read {path}: {exc}") from exc

    header = [h.strip() for h in header]
    if label_column not in header:
        raise ValueError(f"{path}: label column {label_column!r} not in header {header}")
    label_idx = header.index(label_column)
    feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)
    d = len(feature_names)

    values = np.zeros((len(rows), d))
    mask = np.ones((len(rows), d), dtype=bool)
    label_map: dict[str, int] = {}
    labels = np.zeros(len(rows), dtype=int)
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(f"{path}: row {i + 2} has {len(row)} cells, expected {len(header)}")
        tok = row[label_idx].strip()
        if tok in missing_tokens:
            raise ValueError(f"{path}: row {i + 2} has a missing label")
        labels[i] = label_map.setdefault(tok, len(label_map))
        j = 0
        for col, cell in enumerate(row):
            if col == label_idx:
                continue
            cell = cell.strip()
            if cell in missing_tokens:
                mask[i, j] = False
            else:
                try:
                    values[i, j] = float(cell)
                except ValueError:
                    raise ValueError(
                        f"{path}: unparseable cell at row {i + 2}, column {header[col]!r}: {cell!r}"
                    ) from None
            j += 1
        if not mask[i].any():
            raise ValueError(f"{path}: row {i + 2} has no observed features")
    return IncompleteDataset(values, mask, labels, feature_names)


def save_csv(data: IncompleteDataset, path, label_column: str = "class") -> None:
    """Write a dataset back to CSV; masked cells become empty fields."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(data.feature_names) + [label_column])
        for i in range(data.n_samples):
            row = [repr(float(v)) if m else "" for v, m in zip(data.values[i], data.mask[i])]
            row.append(str(int(data.labels[i])))
            writer.writerow(row)


def fit_normalizer(data: IncompleteDataset) -> NormalizationParams:
    """Per-feature min/max over observed entries only.

    Features with no observed entries or a single observed value get
    min == max and are flagged constant.
    """
    lo = np.where(data.mask, data.values, np.inf).min(axis=0)
    hi = np.where(data.mask, data.values, -np.inf).max(axis=0)
    unobserved = ~data.mask.any(axis=0)
    lo = np.where(unobserved, 0.0, lo)
    hi = np.where(unobserved, 0.0, hi)
    constant = unobserved | (hi <= lo)
    return NormalizationParams(lo, hi, constant)


def apply_normalizer(data: IncompleteDataset, params: NormalizationParams) -> IncompleteDataset:
    """Map observed cells to (x - min) / (max - min), clamped to [0, 1].

    Constant features map to 0. The mask is unchanged; masked cells are
    zeroed so that stale raw-scale values cannot leak downstream.
    """
    if params.minimum.shape != (data.n_features,):
        raise ValueError("normalizer dimension does not match dataset")
    span = np.where(params.constant, 1.0, params.maximum - params.minimum)
    scaled = (data.values - params.minimum) / span
    scaled = np.where(params.constant, 0.0, scaled)
    scaled = np.clip(scaled, 0.0, 1.0)
    scaled = np.where(data.mask, scaled, 0.0)
    return replace(data, values=scaled)


def stratified_folds(labels, k: int, seed: int, run_id: int = 0) -> list[FoldSplit]:
    """Deterministic stratified k-fold assignment.

    Members of each class are shuffled and dealt so that per-class test counts
    differ by at most one across folds; the remainder goes to the folds with
    the smallest running size (ties broken by fold id), keeping overall fold
    sizes as equal as possible.
    """
    labels = np.asarray(labels)
    n = len(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of samples ({n})")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    loads = np.zeros(k, dtype=int)
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        base, extra = divmod(len(idx), k)
        sizes = np.full(k, base)
        sizes[np.argsort(loads, kind="stable")[:extra]] += 1
        start = 0
        for f in range(k):
            folds[f].extend(idx[start:start + sizes[f]].tolist())
            start += sizes[f]
        loads += sizes
    splits = []
    everything = np.arange(n)
    for f in range(k):
        test = np.sort(np.asarray(folds[f], dtype=int))
        train = np.setdiff1d(everything, test)
        splits.append(FoldSplit(train, test, fold_id=f, run_id=run_id))
    return splits
