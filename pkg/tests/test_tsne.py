"""Exact t-SNE: perplexity calibration, joint distribution, cluster geometry."""

import math

import numpy as np
import pytest

from provdetect.errors import PerplexityTooLarge
from provdetect.tsne import conditional_probabilities, joint_probabilities, tsne


def row_perplexity(p_row):
    """Independent recomputation: 2^H(P_i) from the distribution itself."""
    nz = p_row[p_row > 0]
    entropy = -float(np.sum(nz * np.log2(nz)))
    return 2.0 ** entropy


def blobs(n_per=20, d=5, seed=0, separation=8.0):
    rs = np.random.RandomState(seed)
    a = rs.normal(0.0, 0.3, size=(n_per, d))
    b = rs.normal(separation, 0.3, size=(n_per, d))
    return np.vstack([a, b])


class TestCalibration:
    @pytest.mark.parametrize("perplexity", [5.0, 15.0, 30.0])
    def test_each_row_hits_target(self, perplexity):
        X = np.random.RandomState(1).normal(0, 1, (120, 8))
        P, betas = conditional_probabilities(X, perplexity)
        assert P.shape == (120, 120)
        assert betas.shape == (120,)
        for i in range(120):
            assert P[i, i] == 0.0
            assert abs(row_perplexity(P[i]) - perplexity) <= 1e-3

    def test_rows_are_distributions(self):
        X = np.random.RandomState(2).normal(0, 1, (60, 4))
        P, _ = conditional_probabilities(X, 12.0)
        assert np.all(P >= 0.0)
        assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9)

    def test_betas_positive(self):
        X = np.random.RandomState(3).normal(0, 1, (40, 4))
        _, betas = conditional_probabilities(X, 10.0)
        assert np.all(betas > 0.0)

    def test_tight_cluster_gets_high_beta(self):
        # beta = 1/(2sigma²): near-duplicate neighborhoods need a narrow kernel.
        X = blobs(n_per=25, separation=50.0, seed=4)
        _, betas = conditional_probabilities(X, 10.0)
        assert np.min(betas) > 0.0
        # both clusters are equally tight → betas comparable across clusters
        assert np.median(betas[:25]) == pytest.approx(np.median(betas[25:]), rel=2.0)


class TestJoint:
    def test_sums_to_one_exactly_within_1e9(self):
        X = np.random.RandomState(5).normal(0, 1, (150, 6))
        P = joint_probabilities(X, 20.0)
        assert abs(float(P.sum()) - 1.0) <= 1e-9

    def test_symmetric(self):
        X = np.random.RandomState(6).normal(0, 1, (50, 4))
        P = joint_probabilities(X, 10.0)
        assert np.array_equal(P, P.T)

    def test_nonnegative_zero_diagonal(self):
        X = np.random.RandomState(7).normal(0, 1, (40, 4))
        P = joint_probabilities(X, 10.0)
        assert np.all(P >= 0.0)
        assert np.all(np.diag(P) == 0.0)


class TestEmbedding:
    def test_shape_and_determinism(self):
        X = blobs(n_per=15, seed=8)
        a = tsne(X, perplexity=8.0, iters=60, seed=3)
        b = tsne(X, perplexity=8.0, iters=60, seed=3)
        assert a.shape == (30, 2)
        assert np.array_equal(a, b)

    def test_seed_changes_layout(self):
        X = blobs(n_per=15, seed=9)
        a = tsne(X, perplexity=8.0, iters=60, seed=1)
        b = tsne(X, perplexity=8.0, iters=60, seed=2)
        assert not np.array_equal(a, b)

    def test_two_clusters_stay_separated(self):
        X = blobs(n_per=20, seed=10)
        Y = tsne(X, perplexity=10.0, iters=350, seed=0)
        a, b = Y[:20], Y[20:]
        intra = max(
            float(np.max(np.linalg.norm(a - a.mean(axis=0), axis=1))),
            float(np.max(np.linalg.norm(b - b.mean(axis=0), axis=1))),
        )
        inter = float(np.linalg.norm(a.mean(axis=0) - b.mean(axis=0)))
        assert inter > intra

    def test_output_centered(self):
        X = blobs(n_per=12, seed=11)
        Y = tsne(X, perplexity=7.0, iters=50, seed=0)
        assert np.allclose(Y.mean(axis=0), 0.0, atol=1e-9)

    def test_output_finite(self):
        X = np.random.RandomState(12).normal(0, 1, (25, 6))
        Y = tsne(X, perplexity=7.0, iters=120, seed=0)
        assert np.all(np.isfinite(Y))

    def test_perplexity_too_large(self):
        X = np.random.RandomState(13).normal(0, 1, (12, 4))
        with pytest.raises(PerplexityTooLarge):
            tsne(X, perplexity=5.0, iters=10, seed=0)  # needs perp ≤ (12−1)/3

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            tsne(np.zeros((3, 2)), perplexity=1.0, iters=5, seed=0)
