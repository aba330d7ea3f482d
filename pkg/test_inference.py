"""
Tests for the Gram estimate, standardized statistic, intervals and f(0) estimate
"""
import math

import numpy as np
import pytest

from src.core import Dataset, IndexSet
from src.inference import (
    AsymptoticContext,
    SigmaEstimate,
    asymptotic_variance,
    confidence_interval,
    estimate_f0,
    oracle_linearization,
    sigma_hat,
    standardized_stat,
)
from src.penalty import SeloTuning
from src.solver import FitConfig, fit
from src.utils.errors import ContractViolation, SingularMatrixError


def identity_context(n=100):
    return AsymptoticContext(sigma=SigmaEstimate.from_matrix(np.eye(2)), f0=1.0, tau=0.5, n=n, u=np.array([1.0, 0.0]))


class TestSigmaHat:
    def test_orthogonal_rows(self):
        ds = Dataset(y=np.zeros(2), X=np.eye(2))
        np.testing.assert_allclose(sigma_hat(ds, IndexSet.full(2)).matrix, np.diag([0.5, 0.5]))

    def test_singleton(self, rng):
        X = rng.normal(size=(30, 3))
        ds = Dataset(y=np.zeros(30), X=X)
        got = sigma_hat(ds, IndexSet.of([1], 3)).matrix
        assert got.shape == (1, 1)
        assert got[0, 0] == pytest.approx(np.mean(X[:, 1] ** 2), abs=1e-12)

    def test_matches_triple_loop(self, rng):
        n, d = 40, 5
        X = rng.normal(size=(n, d))
        ds = Dataset(y=np.zeros(n), X=X)
        A = IndexSet.of([0, 2, 4], d)
        expected = np.zeros((3, 3))
        for a, j in enumerate(A):
            for b, k in enumerate(A):
                total = 0.0
                for i in range(n):
                    total += X[i, j] * X[i, k]
                expected[a, b] = total / n
        np.testing.assert_allclose(sigma_hat(ds, A).matrix, expected, atol=1e-12)

    def test_row_permutation_invariance(self, rng):
        X = rng.normal(size=(50, 4))
        perm = rng.permutation(50)
        A = IndexSet.full(4)
        one = sigma_hat(Dataset(y=np.zeros(50), X=X), A).matrix
        two = sigma_hat(Dataset(y=np.zeros(50), X=X[perm]), A).matrix
        np.testing.assert_allclose(one, two, atol=1e-12)

    def test_singular_flagged_and_refused(self):
        X = np.column_stack([np.arange(6.0), 2 * np.arange(6.0)])
        sigma = sigma_hat(Dataset(y=np.zeros(6), X=X), IndexSet.full(2))
        assert sigma.singular
        ctx = AsymptoticContext(sigma=sigma, f0=1.0, tau=0.5, n=6, u=np.array([1.0, 0.0]))
        with pytest.raises(SingularMatrixError):
            standardized_stat(ctx, np.zeros(2), np.ones(2))

    def test_empty_set(self):
        with pytest.raises(ContractViolation):
            sigma_hat(Dataset(y=np.zeros(2), X=np.eye(2)), IndexSet.empty(2))


class TestStandardizedStat:
    def test_zero_difference(self, rng):
        b = rng.normal(size=2)
        assert standardized_stat(identity_context(), b, b) == 0.0

    def test_hand_example(self):
        assert standardized_stat(identity_context(), np.array([0.1, 0.0]), np.zeros(2)) == pytest.approx(2.0)

    def test_sign_flip(self, rng):
        sigma = sigma_hat(Dataset(y=np.zeros(30), X=rng.normal(size=(30, 3))), IndexSet.full(3))
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        diff = rng.normal(size=3)
        plus = AsymptoticContext(sigma=sigma, f0=0.4, tau=0.3, n=30, u=u)
        minus = AsymptoticContext(sigma=sigma, f0=0.4, tau=0.3, n=30, u=-u)
        assert standardized_stat(minus, diff, np.zeros(3)) == pytest.approx(-standardized_stat(plus, diff, np.zeros(3)))

    def test_solve_matches_explicit_inverse(self, rng):
        X = rng.normal(size=(200, 4))
        sigma = sigma_hat(Dataset(y=np.zeros(200), X=X), IndexSet.full(4))
        u = rng.normal(size=4)
        u /= np.linalg.norm(u)
        ctx = AsymptoticContext(sigma=sigma, f0=1.0, tau=0.5, n=200, u=u)
        assert ctx.quad_form() == pytest.approx(u @ np.linalg.inv(sigma.matrix) @ u, abs=1e-8)

    def test_relabeling_invariance(self, rng):
        X = rng.normal(size=(80, 4))
        sigma = sigma_hat(Dataset(y=np.zeros(80), X=X), IndexSet.full(4)).matrix
        u = rng.normal(size=4)
        u /= np.linalg.norm(u)
        diff = rng.normal(size=4)
        perm = rng.permutation(4)
        P = np.eye(4)[perm]
        base = AsymptoticContext(sigma=sigma, f0=0.7, tau=0.6, n=80, u=u)
        moved = AsymptoticContext(sigma=P @ sigma @ P.T, f0=0.7, tau=0.6, n=80, u=P @ u)
        assert standardized_stat(moved, P @ diff, np.zeros(4)) == pytest.approx(
            standardized_stat(base, diff, np.zeros(4)), rel=1e-10
        )

    def test_context_validation(self):
        with pytest.raises(ContractViolation):
            AsymptoticContext(sigma=np.eye(2), f0=1.0, tau=0.5, n=10, u=np.array([1.0, 1.0]))
        with pytest.raises(ContractViolation):
            AsymptoticContext(sigma=np.eye(2), f0=0.0, tau=0.5, n=10, u=np.array([1.0, 0.0]))
        with pytest.raises(ContractViolation):
            AsymptoticContext(sigma=np.array([[1.0, 0.5], [0.0, 1.0]]), f0=1.0, tau=0.5, n=10, u=np.array([1.0, 0.0]))


class TestConfidenceInterval:
    def test_hand_example(self):
        ci = confidence_interval(identity_context(), np.array([0.1, 0.0]), 0.95)
        assert ci.half_width == pytest.approx(1.959964 * 0.05, abs=1e-6)
        assert ci.center == pytest.approx(0.1)
        assert ci.center - ci.lower == pytest.approx(ci.upper - ci.center)

    def test_tiny_level_collapses(self):
        ci = confidence_interval(identity_context(), np.array([0.3, 1.0]), 1e-12)
        assert ci.half_width < 1e-12 and ci.contains(0.3)

    def test_nested(self):
        ctx = identity_context()
        wide = confidence_interval(ctx, np.array([0.2, 0.0]), 0.99)
        narrow = confidence_interval(ctx, np.array([0.2, 0.0]), 0.95)
        assert wide.lower < narrow.lower and narrow.upper < wide.upper

    def test_bad_level(self):
        with pytest.raises(ContractViolation):
            confidence_interval(identity_context(), np.zeros(2), 1.0)


class TestEstimateF0:
    def test_standard_normal(self):
        r = np.random.default_rng(3).normal(size=100_000)
        assert estimate_f0(r) == pytest.approx(1 / math.sqrt(2 * math.pi), abs=0.02)

    def test_scale_equivariance(self, rng):
        r = rng.normal(size=5000)
        assert estimate_f0(3.0 * r) == pytest.approx(estimate_f0(r) / 3.0, rel=0.05)

    def test_laplace(self):
        r = np.random.default_rng(5).laplace(size=100_000)
        assert estimate_f0(r, bandwidth=0.02) == pytest.approx(0.5, abs=0.03)

    def test_degenerate(self):
        with pytest.raises(ContractViolation):
            estimate_f0(np.ones(50))
        with pytest.raises(ContractViolation):
            estimate_f0(np.arange(10.0))


class TestLinearization:
    def test_variance(self):
        assert asymptotic_variance(0.5, 0.5) == pytest.approx(1.0)

    @staticmethod
    def linearization_gaps(n, reps, seed):
        """Mean ||err - lin|| and mean ||err|| over seeded median regressions"""
        beta0 = np.array([1.0, -1.0, 0.5])
        cfg = FitConfig(local_search=False)
        gaps, errors = [], []
        for rep in range(reps):
            rng = np.random.default_rng([seed, rep])
            X = rng.normal(size=(n, 3))
            eps = rng.normal(size=n)
            ds = Dataset(y=X @ beta0 + eps, X=X)
            res = fit(ds, 0.5, SeloTuning(lambda_=1e-8, gamma=1.0), cfg)
            lin = oracle_linearization(ds, IndexSet.full(3), eps, 0.5, 1 / math.sqrt(2 * math.pi))
            err = res.beta_hat - beta0
            gaps.append(np.linalg.norm(err - lin))
            errors.append(np.linalg.norm(err))
        return float(np.mean(gaps)), float(np.mean(errors))

    def test_remainder_shrinks_faster_than_error(self):
        small_gap, _ = self.linearization_gaps(500, 20, seed=17)
        big_gap, big_err = self.linearization_gaps(4000, 20, seed=18)
        assert big_gap < big_err
        # the remainder is of order n^-3/4, so an eightfold n cuts it by about 0.21
        assert big_gap < 0.5 * small_gap
