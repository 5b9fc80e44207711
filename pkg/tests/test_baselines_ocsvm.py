"""One-class SVM: dual feasibility, agreement with a slow exact QP solver."""

import math

import numpy as np
import pytest

from provdetect.baselines import OneClassSVM, ocsvm_fit, ocsvm_score, rbf_kernel
from provdetect.errors import ConvergenceFailure


def project_capped_simplex(x, cap):
    """Euclidean projection onto {a : sum a = 1, 0 <= a_i <= cap} by bisection."""
    lo = float(np.min(x)) - cap - 1.0
    hi = float(np.max(x)) + 1.0
    for _ in range(200):
        tau = 0.5 * (lo + hi)
        total = float(np.sum(np.clip(x - tau, 0.0, cap)))
        if total > 1.0:
            lo = tau
        else:
            hi = tau
    return np.clip(x - 0.5 * (lo + hi), 0.0, cap)


def qp_reference(K, nu, iters=300_000, tol=1e-14):
    """Projected-gradient reference for min ½ aᵀKa on the capped simplex.

    Deliberately slow and simple: fixed step 1/λ_max(K), projection by
    bisection.  Independent of the production SMO path.
    """
    n = K.shape[0]
    cap = 1.0 / (nu * n)
    step = 1.0 / float(np.linalg.eigvalsh(K)[-1])
    alpha = project_capped_simplex(np.full(n, 1.0 / n), cap)
    for _ in range(iters):
        new = project_capped_simplex(alpha - step * (K @ alpha), cap)
        if float(np.max(np.abs(new - alpha))) < tol:
            return new
        alpha = new
    return alpha


def blob(n=20, d=3, seed=0, scale=1.0):
    return np.random.RandomState(seed).normal(0.0, scale, size=(n, d))


class TestKernel:
    def test_diagonal_is_one(self):
        X = blob(10)
        K = rbf_kernel(X, X, gamma=0.5)
        assert np.allclose(np.diag(K), 1.0, atol=1e-15)

    def test_symmetric_positive(self):
        X = blob(15)
        K = rbf_kernel(X, X, gamma=0.3)
        assert np.allclose(K, K.T, atol=1e-15)
        assert np.all(K > 0.0)

    def test_known_value(self):
        A = np.array([[0.0, 0.0]])
        B = np.array([[1.0, 1.0]])
        K = rbf_kernel(A, B, gamma=0.25)
        assert math.isclose(float(K[0, 0]), math.exp(-0.5), rel_tol=1e-12)


class TestDualSolution:
    def test_constraints_hold_exactly(self):
        X = blob(40, seed=1)
        model = ocsvm_fit(X, nu=0.05)
        cap = 1.0 / (0.05 * 40)
        assert abs(math.fsum(model.alpha.tolist()) - 1.0) <= 1e-12
        assert np.all(model.alpha >= 0.0)
        assert np.all(model.alpha <= cap)

    @pytest.mark.parametrize("nu,seed", [(0.01, 0), (0.1, 1), (0.5, 2)])
    def test_matches_projected_gradient_reference(self, nu, seed):
        X = blob(20, d=3, seed=seed)
        gamma = 1.0 / 3
        model = ocsvm_fit(X, nu=nu, gamma=gamma, tol=1e-7)

        K = rbf_kernel(X, X, gamma)
        ref_alpha = qp_reference(K, nu)

        # Compare in decision space (the QP objective is strictly convex in
        # Ka even when individual coordinates swap inside a tie).
        fit_alpha = np.zeros(20)
        sv_rows = rbf_kernel(model.support_vectors, X, gamma)
        fit_margin = model.alpha @ sv_rows
        ref_margin = K @ ref_alpha
        assert np.max(np.abs(fit_margin - ref_margin)) <= 1e-3

        probes = blob(10, d=3, seed=99, scale=2.0)
        k_fit = rbf_kernel(probes, model.support_vectors, gamma) @ model.alpha
        k_ref = rbf_kernel(probes, X, gamma) @ ref_alpha
        assert np.max(np.abs(k_fit - k_ref)) <= 1e-3

    def test_objective_not_above_reference(self):
        X = blob(25, seed=3)
        gamma = 0.4
        nu = 0.2
        model = ocsvm_fit(X, nu=nu, gamma=gamma, tol=1e-7)
        K = rbf_kernel(X, X, gamma)
        ref_alpha = qp_reference(K, nu)

        full_alpha = np.zeros(25)
        # reconstruct dense alpha from support set by matching rows
        for a, sv in zip(model.alpha, model.support_vectors):
            row = int(np.argmin(np.sum((X - sv) ** 2, axis=1)))
            full_alpha[row] = a
        obj_fit = 0.5 * full_alpha @ K @ full_alpha
        obj_ref = 0.5 * ref_alpha @ K @ ref_alpha
        assert obj_fit <= obj_ref + 1e-6

    def test_kkt_gap_below_tolerance(self):
        X = blob(30, seed=4)
        gamma = 0.5
        model = ocsvm_fit(X, nu=0.1, gamma=gamma, tol=1e-4)
        K = rbf_kernel(X, X, gamma)
        full_alpha = np.zeros(30)
        for a, sv in zip(model.alpha, model.support_vectors):
            full_alpha[int(np.argmin(np.sum((X - sv) ** 2, axis=1)))] = a
        grad = K @ full_alpha
        cap = 1.0 / (0.1 * 30)
        eps = 1e-9
        up = full_alpha < cap - eps
        down = full_alpha > eps
        gap = float(np.max(grad[down]) - np.min(grad[up]))
        assert gap <= 1e-4 + 1e-9


class TestModel:
    def test_default_gamma_is_reciprocal_dim(self):
        X = blob(10, d=768 // 4, seed=5)
        model = ocsvm_fit(X)
        assert model.gamma == 1.0 / (768 // 4)

    def test_single_point_degenerates_cleanly(self):
        X = np.array([[1.0, 2.0]])
        model = ocsvm_fit(X)
        assert model.alpha.tolist() == [1.0]
        assert model.rho == 1.0  # K[0,0] of an RBF kernel
        assert float(model.score(X)[0]) == pytest.approx(0.0, abs=1e-12)

    def test_far_point_scores_rho(self):
        X = blob(30, d=4, seed=6)
        gamma = 0.25
        model = ocsvm_fit(X, nu=0.1, gamma=gamma)
        far = np.full((1, 4), 10.0 / math.sqrt(gamma) + 100.0)
        assert float(model.score(far)[0]) == pytest.approx(model.rho, abs=1e-6)

    def test_training_inliers_score_below_far_outliers(self):
        X = blob(60, d=4, seed=7)
        model = ocsvm_fit(X, nu=0.05)
        inlier_scores = model.score(X)
        outlier_scores = model.score(blob(10, d=4, seed=8) + 15.0)
        assert float(np.median(outlier_scores)) > float(np.max(inlier_scores))

    def test_convergence_failure_carries_residual(self):
        X = blob(50, seed=9)
        with pytest.raises(ConvergenceFailure) as exc:
            ocsvm_fit(X, nu=0.1, max_iter=1)
        assert exc.value.residual > 0.0

    def test_nu_one_is_fixed_uniform(self):
        # cap = 1/n forces alpha = (1/n, ..., 1/n); must not crash.
        X = blob(15, seed=10)
        model = ocsvm_fit(X, nu=1.0)
        assert np.allclose(model.alpha, 1.0 / 15, atol=1e-12)

    def test_round_trip_dict(self):
        X = blob(25, seed=11)
        model = ocsvm_fit(X, nu=0.1)
        clone = OneClassSVM.from_dict(model.to_dict())
        probes = blob(8, seed=12)
        assert np.array_equal(model.score(probes), clone.score(probes))

    def test_score_helper_matches_method(self):
        X = blob(25, seed=13)
        model = ocsvm_fit(X, nu=0.1)
        probes = blob(8, seed=14)
        assert np.array_equal(ocsvm_score(model, probes), model.score(probes))

    def test_bad_nu_rejected(self):
        with pytest.raises(ValueError):
            ocsvm_fit(blob(10), nu=0.0)
        with pytest.raises(ValueError):
            ocsvm_fit(blob(10), nu=1.5)
