"""
Tests for the BIC criterion, grid selection and restricted refits
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.core import Dataset, IndexSet, mean_check_loss
from src.penalty import SeloTuning
from src.selection import (
    BicConfig,
    SnPolicy,
    bic_ordering_check,
    bic_score,
    default_grids,
    fit_restricted,
    select,
    sn_cap,
    sn_value,
)
from src.solver import FitConfig, fit
from src.utils.errors import ContractViolation, NoFeasibleModelError


def sparse_dataset(rng, n, d, beta0, sigma=1.0):
    X = rng.normal(size=(n, d))
    beta = np.zeros(d)
    beta[:len(beta0)] = beta0
    return Dataset(y=X @ beta + sigma * rng.normal(size=n), X=X)


class TestSn:
    def test_small_dimension(self):
        assert sn_value(1000, 5) == 1.0

    def test_growing_dimension(self):
        assert sn_value(100, 60) == pytest.approx(19.898, abs=1e-3)

    def test_fixed(self):
        assert sn_value(57, 3, BicConfig(sn_policy=SnPolicy.FIXED, sn_fixed=3.5)) == 3.5

    def test_formula(self):
        cfg = BicConfig(sn_policy="formula")
        assert sn_value(10, 3, cfg) == 1.0
        assert sn_value(10**6, 3, cfg) == pytest.approx(math.log(math.log(10**6)))

    def test_rejects_tiny_n(self):
        with pytest.raises(ContractViolation):
            sn_value(1, 1)

    def test_fixed_needs_value(self):
        with pytest.raises(ValidationError):
            BicConfig(sn_policy="fixed")

    def test_cap(self):
        assert sn_cap(400) == 10
        assert sn_cap(1000, BicConfig(c_cap=2.0, a_exponent=0.25)) == 11

    def test_config_constraints(self):
        with pytest.raises(ValidationError):
            BicConfig(a_exponent=0.5)
        with pytest.raises(ValidationError):
            BicConfig(lambda_grid=())
        with pytest.raises(ValidationError):
            BicConfig(gamma_grid=(0.1, -1.0))


class TestBicScore:
    def test_hand_example(self):
        ds = Dataset(y=np.array([0.5, -0.5, 0.5, -0.5]), X=np.eye(4)[:, :2])
        res = fit(ds, 0.5, SeloTuning(lambda_=1e3, gamma=1.0))
        assert res.k_nonzero == 0
        score = bic_score(ds, res, 0.5, 1.0)
        assert score.mean_loss == pytest.approx(0.25)
        assert score.value == pytest.approx(math.log(0.25), abs=1e-12)
        # same loss with two nonzeros: log 0.25 + (log 4 / 4) * 2
        assert score.model_copy(update={"k_nonzero": 2}).reconstruct(1e-12) == pytest.approx(-0.693147, abs=1e-6)

    def test_empty_model(self, rng):
        ds = sparse_dataset(rng, 30, 3, [1.0])
        res = fit_restricted(ds, IndexSet.empty(3), 0.3, SeloTuning(lambda_=0.1, gamma=0.1))
        score = bic_score(ds, res, 0.3, 2.0)
        assert score.value == pytest.approx(math.log(mean_check_loss(ds.y, 0.3)), abs=1e-12)

    def test_floor(self):
        X = np.column_stack([np.ones(5), np.arange(5.0)])
        ds = Dataset(y=X @ np.array([1.0, 2.0]), X=X)
        res = fit(ds, 0.5, SeloTuning(lambda_=1e-10, gamma=1.0))
        score = bic_score(ds, res, 0.5, 1.0)
        assert score.mean_loss < 1e-12
        assert score.value == pytest.approx(math.log(1e-12) + math.log(5) / 5 * res.k_nonzero, abs=1e-9)

    def test_reconstruction(self, rng):
        cfg = BicConfig(lambda_grid=(0.3, 0.1, 0.03), gamma_grid=(0.01, 0.1))
        ds = sparse_dataset(rng, 100, 8, [1.5, -1.0])
        result = select(ds, 0.5, cfg)
        for score in result.scoreboard:
            assert score.value == pytest.approx(score.reconstruct(cfg.loss_floor), abs=1e-12)


class TestSelect:
    def test_single_cell(self, rng):
        ds = sparse_dataset(rng, 80, 4, [2.0])
        result = select(ds, 0.5, BicConfig(lambda_grid=(0.1,), gamma_grid=(0.01,)))
        direct = fit(ds, 0.5, SeloTuning(lambda_=0.1, gamma=0.01))
        np.testing.assert_array_equal(result.beta_hat, direct.beta_hat)
        assert (result.best.lambda_, result.best.gamma) == (0.1, 0.01)
        assert result.grid_shape == (1, 1)

    def test_strong_signal_recovers_support(self):
        rng = np.random.default_rng(11)
        n, d = 400, 30
        X = rng.normal(size=(n, d))
        beta0 = np.zeros(d)
        beta0[:3] = [2.0, -2.0, 2.0]
        ds = Dataset(y=X @ beta0 + rng.normal(size=n), X=X)
        result = select(ds, 0.5)
        assert result.active_set.to_list() == [0, 1, 2]
        assert result.best.value == min(s.value for s in result.scoreboard if s.feasible)

    def test_cap_marks_cells_infeasible(self, rng):
        ds = sparse_dataset(rng, 60, 8, [2.0])
        # tiny lambda fits every column; the cap is 60^0.4 ~ 5 < 8
        cfg = BicConfig(lambda_grid=(1e-6, 0.2), gamma_grid=(1.0,))
        result = select(ds, 0.5, cfg)
        dense = [s for s in result.scoreboard if s.lambda_ == 1e-6][0]
        assert dense.k_nonzero == 8 and not dense.feasible
        assert result.excluded_count >= 1
        assert result.best.lambda_ == 0.2

    def test_no_feasible_model(self, rng):
        ds = sparse_dataset(rng, 60, 8, [2.0])
        with pytest.raises(NoFeasibleModelError):
            select(ds, 0.5, BicConfig(lambda_grid=(1e-6,), gamma_grid=(1.0,)))

    def test_shrinking_cap_only_excludes(self, rng):
        ds = sparse_dataset(rng, 120, 10, [2.0, -1.0, 0.5])
        grids = dict(lambda_grid=(0.5, 0.1, 0.02, 0.004, 1e-5), gamma_grid=(0.001, 0.1, 1.0))
        wide = select(ds, 0.5, BicConfig(**grids))
        narrow = select(ds, 0.5, BicConfig(c_cap=0.5, **grids))
        candidates = [s for s in wide.scoreboard if s.feasible and s.k_nonzero <= narrow.cap]
        assert narrow.best == min(candidates, key=lambda s: s.sort_key())
        if wide.best.k_nonzero <= narrow.cap:
            assert narrow.best == wide.best

    def test_deterministic(self, rng):
        ds = sparse_dataset(rng, 100, 6, [1.0, -1.0])
        first = select(ds, 0.4, BicConfig(threads=1))
        second = select(ds, 0.4, BicConfig(threads=3))
        assert first.best == second.best
        assert first.scoreboard == second.scoreboard
        np.testing.assert_array_equal(first.beta_hat, second.beta_hat)

    def test_default_grids(self, rng):
        ds = sparse_dataset(rng, 100, 4, [1.0])
        lambdas, gammas = default_grids(ds, 0.5)
        q_hat = mean_check_loss(ds.y, 0.5)
        assert len(lambdas) == 10
        assert lambdas[0] == pytest.approx(q_hat) and lambdas[-1] == pytest.approx(0.01 * q_hat)
        assert all(a > b for a, b in zip(lambdas, lambdas[1:]))
        g0 = 2.0 * 100 ** -1.5
        assert gammas == pytest.approx((g0, 10 * g0, 100 * g0))


class TestRestricted:
    def test_full_set_matches_fit(self, rng):
        ds = sparse_dataset(rng, 60, 4, [1.0, -1.0])
        t = SeloTuning(lambda_=0.05, gamma=0.05)
        full = fit_restricted(ds, IndexSet.full(4), 0.5, t)
        assert full.objective == pytest.approx(fit(ds, 0.5, t).objective, abs=1e-8)

    def test_empty_set(self, rng):
        ds = sparse_dataset(rng, 20, 3, [1.0])
        res = fit_restricted(ds, IndexSet.empty(3), 0.5, SeloTuning(lambda_=0.1, gamma=0.1))
        np.testing.assert_array_equal(res.beta_hat, np.zeros(3))
        np.testing.assert_array_equal(res.residuals, ds.y)

    def test_embedding(self, rng):
        ds = sparse_dataset(rng, 80, 5, [0.0, 2.0, 0.0, -2.0])
        res = fit_restricted(ds, IndexSet.of([1, 3], 5), 0.5, SeloTuning(lambda_=0.01, gamma=0.01))
        assert res.beta_hat[[0, 2, 4]].tolist() == [0.0, 0.0, 0.0]
        assert res.active_set.issubset(IndexSet.of([1, 3], 5))

    def test_oracle_set_beats_full_fit(self):
        wins = 0
        for seed in range(10):
            rng = np.random.default_rng(100 + seed)
            ds = sparse_dataset(rng, 200, 10, [2.0, -2.0, 2.0])
            t = SeloTuning(lambda_=1e-4, gamma=1.0)
            truth = np.zeros(10)
            truth[:3] = [2.0, -2.0, 2.0]
            oracle = fit_restricted(ds, IndexSet.of([0, 1, 2], 10), 0.5, t)
            full = fit(ds, 0.5, t)
            if np.linalg.norm(oracle.beta_hat - truth) <= np.linalg.norm(full.beta_hat - truth):
                wins += 1
        assert wins >= 8


class TestOrdering:
    def test_true_set_wins(self):
        over_wins = under_wins = 0
        for seed in range(20):
            rng = np.random.default_rng(500 + seed)
            ds = sparse_dataset(rng, 200, 8, [2.0, -2.0, 2.0], sigma=0.5)
            truth = IndexSet.of([0, 1, 2], 8)
            result = bic_ordering_check(
                ds, truth, 0.5, SeloTuning(lambda_=1e-4, gamma=1.0), sn_value(200, 8),
                overfit_A=IndexSet.of([0, 1, 2, 5], 8),
                underfit_A=IndexSet.of([0, 1], 8),
            )
            over_wins += result.bic_true < result.bic_over
            under_wins += result.bic_true < result.bic_under
        assert over_wins >= 18
        assert under_wins == 20

    def test_preconditions(self, rng):
        ds = sparse_dataset(rng, 50, 5, [1.0, 1.0])
        truth = IndexSet.of([0, 1], 5)
        t = SeloTuning(lambda_=0.01, gamma=0.1)
        with pytest.raises(ContractViolation):
            bic_ordering_check(ds, truth, 0.5, t, 1.0, truth, IndexSet.of([0], 5))
        with pytest.raises(ContractViolation):
            bic_ordering_check(ds, truth, 0.5, t, 1.0, IndexSet.of([0, 1, 2], 5), IndexSet.of([0, 1, 3], 5))
        with pytest.raises(ContractViolation):
            bic_ordering_check(ds, truth, 0.5, t, 1.0, IndexSet.full(5), IndexSet.of([0], 5))
