"""MCAR / MNAR injection of artificial missing values at an exact target rate."""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .dataset import IncompleteDataset

_MAX_REDRAWS = 1000


class Mechanism(enum.Enum):
    MCAR = "mcar"
    MNAR = "mnar"


@dataclass(frozen=True)
class MissingSpec:
    mechanism: Mechanism
    rate: float
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.mechanism, str):
            object.__setattr__(self, "mechanism", Mechanism(self.mechanism.lower()))
        if not 0.0 < self.rate < 1.0:
            raise ValueError(f"rate must be in (0, 1), got {self.rate}")


def _target_count(rate: float, n: int, d: int) -> int:
    total = int(np.floor(rate * n * d))
    if total > n * d - n:
        raise ValueError(
            f"rate {rate} would leave some row with no observed cell ({total} of {n * d})"
        )
    return total


def _check_complete(data: IncompleteDataset) -> None:
    if not data.is_complete:
        raise ValueError("injection requires a fully observed dataset")


def inject_mcar(data: IncompleteDataset, spec: MissingSpec) -> IncompleteDataset:
    """Mask exactly floor(rate*n*d) cells chosen uniformly without replacement.

    Draws are rejected wholesale while any row would lose all its observed
    cells, which keeps the selection uniform conditioned on row coverage.
    """
    _check_complete(data)
    n, d = data.values.shape
    total = _target_count(spec.rate, n, d)
    rng = np.random.default_rng(spec.seed)
    for _ in range(_MAX_REDRAWS):
        flat = rng.choice(n * d, size=total, replace=False)
        mask = np.ones(n * d, dtype=bool)
        mask[flat] = False
        mask = mask.reshape(n, d)
        if mask.any(axis=1).all():
            return replace(data, mask=mask)
    raise RuntimeError(f"could not satisfy row coverage after {_MAX_REDRAWS} draws")


def inject_mnar(data: IncompleteDataset, spec: MissingSpec) -> IncompleteDataset:
    """Value-dependent censoring: mask the largest values of selected columns.

    Columns are visited round-robin in seed-shuffled order, each visit masking
    that column's largest still-observed value, until the quota is met. A cell
    is skipped when masking it would leave its row with nothing observed.
    """
    _check_complete(data)
    n, d = data.values.shape
    total = _target_count(spec.rate, n, d)
    rng = np.random.default_rng(spec.seed)
    col_order = rng.permutation(d)
    mask = np.ones((n, d), dtype=bool)
    row_obs = np.full(n, d)
    # per column: rows sorted by value descending, ties by row index
    candidates = [list(np.lexsort((np.arange(n), -data.values[:, j]))) for j in range(d)]
    cursor = np.zeros(d, dtype=int)
    masked = 0
    while masked < total:
        progressed = False
        for j in col_order:
            if masked >= total:
                break
            while cursor[j] < n:
                i = candidates[j][cursor[j]]
                cursor[j] += 1
                if row_obs[i] > 1:
                    mask[i, j] = False
                    row_obs[i] -= 1
                    masked += 1
                    progressed = True
                    break
        if not progressed:
            raise RuntimeError("MNAR quota cannot be met while preserving row coverage")
    return replace(data, mask=mask)


def inject(data: IncompleteDataset, spec: MissingSpec) -> IncompleteDataset:
    if spec.mechanism is Mechanism.MCAR:
        return inject_mcar(data, spec)
    return inject_mnar(data, spec)
