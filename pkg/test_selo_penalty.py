"""
Tests for the seamless-L0 penalty
"""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.penalty import (
    SeloTuning,
    shape_difference_bound,
    penalty_derivative,
    penalty_shape,
    penalty_total,
    penalty_value,
)


def tuning(lam=1.0, gamma=0.5):
    return SeloTuning(lambda_=lam, gamma=gamma)


class TestTuning:
    def test_alias_and_name(self):
        assert SeloTuning(**{"lambda": 2.0, "gamma": 0.1}).lambda_ == 2.0
        assert tuning(3.0, 0.2).as_dict() == {"lambda": 3.0, "gamma": 0.2}

    @pytest.mark.parametrize("lam,gamma", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (math.inf, 1.0), (1.0, math.nan)])
    def test_rejects_invalid(self, lam, gamma):
        with pytest.raises(ValidationError):
            SeloTuning(lambda_=lam, gamma=gamma)


class TestPenaltyValue:
    def test_examples(self):
        assert penalty_value(0.0, tuning()) == 0.0
        assert penalty_value(0.5, tuning(1.0, 0.5)) == pytest.approx(0.5849625, abs=1e-6)
        big = penalty_value(1e12, tuning(2.0, 1.0))
        assert 2.0 - 1e-6 <= big < 2.0

    def test_symmetry(self, rng):
        b = rng.normal(scale=10, size=100_000)
        t = tuning(0.7, 0.01)
        np.testing.assert_array_equal(penalty_value(b, t), penalty_value(-b, t))

    def test_monotone_and_bounded(self, rng):
        t = tuning(1.3, 0.05)
        b = np.sort(np.abs(rng.standard_cauchy(size=10_000)))
        values = penalty_value(b, t)
        assert np.all(values >= 0) and np.all(values < 1.3)
        assert np.all(np.diff(values) >= 0)

    def test_concave_in_magnitude(self):
        t = tuning(1.0, 0.3)
        grid = np.linspace(1e-3, 20, 5000)
        values = penalty_value(grid, t)
        second = values[2:] - 2 * values[1:-1] + values[:-2]
        assert np.all(second <= 1e-12)

    def test_total(self, rng):
        t = tuning(1.0, 0.2)
        assert penalty_total(np.zeros(7), t) == 0.0
        assert penalty_total(np.array([0.0, 1e15, 0.0]), t) == pytest.approx(1.0, abs=1e-9)
        beta = rng.normal(size=25)
        expected = 0.0
        for b in beta:
            expected += penalty_value(float(b), t)
        assert penalty_total(beta, t) == pytest.approx(expected, abs=1e-12)
        assert penalty_total(beta, t) <= 25 * 1.0


class TestPenaltyDerivative:
    def test_at_zero(self):
        assert penalty_derivative(0.0, tuning(math.log(2), 0.1)) == pytest.approx(10.0, rel=1e-12)

    def test_at_one(self):
        assert penalty_derivative(1.0, tuning(math.log(2), 1.0)) == pytest.approx(1 / 6, abs=1e-9)

    def test_flat_tail(self):
        assert penalty_derivative(1e12, tuning()) < 1e-20

    def test_positive_and_decreasing(self, rng):
        t = tuning(0.4, 0.02)
        b = np.sort(rng.uniform(0, 50, size=5000))
        w = penalty_derivative(b, t)
        assert np.all(w > 0)
        assert np.all(np.diff(w) <= 0)

    def test_finite_differences(self, rng):
        h = 1e-6
        for _ in range(1000):
            t = tuning(rng.uniform(0.1, 3), rng.uniform(0.01, 2))
            b = rng.choice([-1, 1]) * rng.uniform(1e-3, 10)
            fd = (penalty_value(abs(b) + h, t) - penalty_value(abs(b) - h, t)) / (2 * h)
            deriv = penalty_derivative(b, t)
            assert abs(deriv - fd) / max(1.0, abs(deriv)) <= 1e-4


class TestDifferenceBound:
    def test_shape_is_penalty_without_factor(self):
        t = tuning(3.0, 0.25)
        assert penalty_shape(1.7, 0.25) * 3.0 / math.log(2) == pytest.approx(penalty_value(1.7, t), rel=1e-14)

    def test_bound_holds_away_from_origin(self, rng):
        c = 0.5
        for _ in range(10_000):
            gamma = rng.uniform(1e-6, 1e-3)
            x1 = rng.choice([-1, 1]) * rng.uniform(c, 5)
            x2 = rng.choice([-1, 1]) * max(c, abs(x1) + rng.uniform(-1e-3, 1e-3))
            gap = abs(abs(x2) - abs(x1))
            diff = abs(penalty_shape(x2, gamma) - penalty_shape(x1, gamma))
            assert diff <= shape_difference_bound(c, gamma) * gap + 1e-15

    def test_bound_constant(self):
        assert shape_difference_bound(0.5, 1e-3) == pytest.approx(16e-3)
