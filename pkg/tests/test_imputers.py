import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from incfs import (ImputerConfig, IncompleteDataset, build_ensemble, impute_em,
                   impute_knn, impute_mean, impute_svd)

from conftest import random_incomplete


def knn_oracle(values, mask, k, target_row, target_col):
    """Exhaustive partial-distance ranking, written independently of the package."""
    n, d = values.shape
    scored = []
    for j in range(n):
        if j == target_row or not mask[j, target_col]:
            continue
        shared = [l for l in range(d) if mask[target_row, l] and mask[j, l]]
        if not shared:
            continue
        sq = sum((values[target_row, l] - values[j, l]) ** 2 for l in shared)
        scored.append((math.sqrt(sq * d / len(shared)), j))
    if not scored:
        obs = [values[i, target_col] for i in range(n) if mask[i, target_col]]
        return sum(obs) / len(obs) if obs else 0.0
    scored.sort(key=lambda t: (t[0], t[1]))
    neighbors = [j for _, j in scored[:k]]
    return sum(values[j, target_col] for j in neighbors) / len(neighbors)


class TestMean:
    def test_column_mean(self):
        values = [[0.2, 1.0], [0.6, 2.0], [0.0, 3.0]]
        mask = [[True, True], [True, True], [False, True]]
        data = IncompleteDataset(values, mask, [0, 1, 0])
        assert impute_mean(data)[2, 0] == pytest.approx(0.4)

    def test_identity_on_complete(self):
        data = random_incomplete(5, 3, missing=0, seed=0)
        assert np.array_equal(impute_mean(data), data.values)

    def test_fully_missing_column_fills_zero(self):
        values = np.array([[1.0, 9.9], [2.0, 9.9]])
        mask = np.array([[True, False], [True, False]])
        out = impute_mean(IncompleteDataset(values, mask, [0, 1]))
        assert (out[:, 1] == 0.0).all()


class TestKnn:
    def test_k1_copies_unique_nearest(self):
        values = np.array([
            [0.0, 0.0, 0.0, 0.5],
            [0.01, 0.0, 0.0, 0.7],
            [0.9, 0.9, 0.9, 0.1],
        ])
        mask = np.ones((3, 4), bool)
        mask[0, 3] = False
        out = impute_knn(IncompleteDataset(values, mask, [0, 1, 0]), ImputerConfig(knn_k=1))
        assert out[0, 3] == pytest.approx(0.7)

    def test_fallback_to_column_mean(self):
        # nobody observes feature 1 except the incomplete row itself
        values = np.array([[0.1, 0.0], [0.2, 0.0], [0.3, 0.0]])
        mask = np.array([[True, False], [True, False], [True, False]])
        out = impute_knn(IncompleteDataset(values, mask, [0, 1, 0]))
        assert (out[:, 1] == 0.0).all()

    def test_single_missing_cell_matches_oracle(self):
        data = random_incomplete(6, 3, missing=1, seed=42)
        i, q = [(i, q) for i in range(6) for q in range(3) if not data.mask[i, q]][0]
        out = impute_knn(data, ImputerConfig(knn_k=2))
        assert out[i, q] == pytest.approx(knn_oracle(data.values, data.mask, 2, i, q))

    @pytest.mark.parametrize("seed", range(40))
    def test_oracle_equivalence_small_matrices(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(3, 9))
        d = int(rng.integers(2, 6))
        missing = int(rng.integers(1, 4))
        data = random_incomplete(n, d, missing=missing, seed=seed + 1000)
        k = int(rng.integers(1, 5))
        out = impute_knn(data, ImputerConfig(knn_k=k))
        for i in range(n):
            for q in range(d):
                if data.mask[i, q]:
                    assert out[i, q] == data.values[i, q]
                else:
                    expected = knn_oracle(data.values, data.mask, k, i, q)
                    assert out[i, q] == pytest.approx(expected, abs=1e-12)


class TestEm:
    def test_identity_on_complete(self):
        data = random_incomplete(8, 3, missing=0, seed=1)
        assert np.allclose(impute_em(data), data.values)

    def test_perfectly_correlated_features(self):
        # x2 = 3 x1 - 1 exactly; the conditional mean must follow the line
        rng = np.random.default_rng(2)
        x1 = rng.random(40)
        values = np.column_stack([x1, 3.0 * x1 - 1.0])
        mask = np.ones((40, 2), bool)
        mask[0, 1] = False
        data = IncompleteDataset(values, mask, rng.integers(0, 2, 40))
        out = impute_em(data, ImputerConfig(em_max_iter=200, em_tol=1e-8))
        assert out[0, 1] == pytest.approx(3.0 * x1[0] - 1.0, abs=1e-3)

    def test_independent_feature_gives_column_mean(self):
        # the incomplete row sits exactly at feature 0's mean, so the
        # conditional expectation must collapse to the marginal column mean
        rng = np.random.default_rng(12)
        col1 = np.concatenate([[0.0], np.tile([1.0, -1.0], 10)])
        col2 = rng.random(21) + 1.0
        values = np.column_stack([col1, col2])
        mask = np.ones((21, 2), bool)
        mask[0, 1] = False
        data = IncompleteDataset(values, mask, np.arange(21) % 2)
        out = impute_em(data, ImputerConfig(em_max_iter=300, em_tol=1e-10))
        assert out[0, 1] == pytest.approx(col2[1:].mean(), abs=1e-3)


class TestSvd:
    def test_rank1_completion_recovers_value(self):
        rng = np.random.default_rng(3)
        u = rng.random(5) + 0.5
        w = rng.random(4) + 0.5
        values = np.outer(u, w)
        mask = np.ones((5, 4), bool)
        mask[2, 1] = False
        data = IncompleteDataset(values, mask, rng.integers(0, 2, 5))
        cfg = ImputerConfig(svd_rank=1, svd_max_iter=2000, svd_tol=1e-12)
        out = impute_svd(data, cfg)
        assert out[2, 1] == pytest.approx(u[2] * w[1], abs=1e-6)

    def test_identity_on_complete(self):
        data = random_incomplete(6, 4, missing=0, seed=4)
        assert np.array_equal(impute_svd(data), data.values)

    def test_full_rank_converges_in_one_iteration(self):
        data = random_incomplete(6, 4, missing=3, seed=5)
        cfg = ImputerConfig(svd_rank=4, svd_tol=1e-8)
        first = impute_svd(data, ImputerConfig(svd_rank=4, svd_max_iter=1))
        converged = impute_svd(data, cfg)
        # full-rank truncation reproduces the filled matrix exactly, so the
        # first refill is already the fixed point
        assert np.allclose(first, converged, atol=1e-8)


class TestEnsemble:
    def test_default_methods(self):
        data = random_incomplete(10, 4, missing=5, seed=6)
        ens = build_ensemble(data)
        assert ens.size == 3
        assert ens.method_tags == ("em", "knn", "svd")

    def test_single_method(self):
        data = random_incomplete(6, 3, missing=2, seed=7)
        ens = build_ensemble(data, methods=("mean",))
        assert ens.size == 1

    def test_members_agree_at_observed_cells(self):
        data = random_incomplete(12, 5, missing=8, seed=8)
        ens = build_ensemble(data)
        for member in ens.members:
            assert np.array_equal(member[data.mask], data.values[data.mask])

    def test_empty_method_list_rejected(self):
        data = random_incomplete(4, 2, missing=1, seed=9)
        with pytest.raises(ValueError):
            build_ensemble(data, methods=())


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_observed_cells_preserved_by_every_imputer(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 10))
    d = int(rng.integers(2, 6))
    data = random_incomplete(n, d, missing=int(rng.integers(0, n)), seed=seed)
    for fn in (impute_mean, impute_knn, impute_em, impute_svd):
        out = fn(data)
        assert np.array_equal(out[data.mask], data.values[data.mask])
        assert np.isfinite(out).all()
