"""
Tests for error laws, data generation, diagnostics and the replication harness
"""
import math

import numpy as np
import pytest
from scipy import stats

from src.core import Dataset
from src.penalty import SeloTuning
from src.selection import BicConfig
from src.simulation import (
    DesignKind,
    ErrorKind,
    SimScenario,
    assumption_report,
    generate,
    ks_distance,
    make_error_dist,
    rate_ladder,
    run_replications,
)
from src.simulation import harness
from src.utils.errors import ContractViolation, NumericalFailure, SimulationError


def scenario(n=200, d=10, signal=(2.0, -2.0, 1.5), error=None, seed=2024, reps=5, **kwargs):
    beta0 = np.zeros(d)
    beta0[:len(signal)] = signal
    return SimScenario(n=n, beta0=beta0, error=error or make_error_dist("normal", 1.0, 0.5), seed=seed, reps=reps, **kwargs)


class TestErrorDistribution:
    def test_normal_median(self):
        dist = make_error_dist(ErrorKind.NORMAL, 1.0, 0.5)
        assert dist.shift == 0.0
        assert dist.f0 == pytest.approx(0.398942, abs=1e-6)

    def test_cauchy_upper_quartile(self):
        dist = make_error_dist("cauchy", 1.0, 0.75)
        assert dist.shift == pytest.approx(1.0, abs=1e-12)
        assert dist.f0 == pytest.approx(1 / (2 * math.pi), abs=1e-9)

    def test_laplace_median(self):
        dist = make_error_dist("laplace", 1.0, 0.5)
        assert dist.shift == 0.0 and dist.f0 == pytest.approx(0.5)

    @staticmethod
    def base_law(kind, param):
        return {
            "normal": stats.norm(scale=param),
            "laplace": stats.laplace(scale=param),
            "cauchy": stats.cauchy(scale=param),
            "student_t": stats.t(df=param),
        }[kind]

    @pytest.mark.parametrize("kind,param", [
        ("normal", 2.0), ("laplace", 0.7), ("cauchy", 1.5), ("student_t", 3.0), ("student_t", 1.5),
    ])
    @pytest.mark.parametrize("tau", [0.1, 0.37, 0.5, 0.9])
    def test_quantile_at_zero(self, kind, param, tau):
        dist = make_error_dist(kind, param, tau)
        law = self.base_law(kind, param)
        assert law.cdf(dist.shift) == pytest.approx(tau, abs=1e-10)
        assert dist.f0 == pytest.approx(law.pdf(dist.shift), rel=1e-10)
        assert dist.f0 > 0

    def test_student_t_matches_ppf(self):
        dist = make_error_dist("student_t", 3.0, 0.8)
        assert dist.shift == pytest.approx(stats.t.ppf(0.8, 3.0), abs=1e-9)

    @pytest.mark.parametrize("kind,param", [("normal", 0.0), ("laplace", -1.0), ("student_t", math.inf), ("gamma", 1.0)])
    def test_invalid(self, kind, param):
        with pytest.raises(ContractViolation):
            make_error_dist(kind, param, 0.5)

    def test_shifted_sample_quantile(self):
        dist = make_error_dist("laplace", 1.0, 0.3)
        eps = dist.sample(np.random.default_rng(9), 100_000)
        assert np.mean(eps < 0) == pytest.approx(0.3, abs=0.01)


class TestGenerate:
    def test_deterministic(self):
        sc = scenario()
        (ds1, e1), (ds2, e2) = generate(sc, 3), generate(sc, 3)
        np.testing.assert_array_equal(ds1.X, ds2.X)
        np.testing.assert_array_equal(ds1.y, ds2.y)
        np.testing.assert_array_equal(e1, e2)

    def test_replications_differ(self):
        sc = scenario()
        assert not np.array_equal(generate(sc, 0)[0].y, generate(sc, 1)[0].y)

    def test_zero_signal(self):
        sc = scenario(signal=())
        ds, eps = generate(sc, 0)
        np.testing.assert_array_equal(ds.y, eps)
        assert len(sc.support) == 0

    def test_error_sign_fraction(self):
        sc = scenario(n=100_000, d=1, signal=(), error=make_error_dist("student_t", 3.0, 0.25), reps=1)
        _, eps = generate(sc, 0)
        assert np.mean(eps < 0) == pytest.approx(0.25, abs=0.01)

    def test_correlated_design(self):
        sc = scenario(n=20_000, d=3, signal=(1.0,), design=DesignKind.GAUSSIAN_CORRELATED, rho=0.6, reps=1)
        ds, _ = generate(sc, 0)
        corr = np.corrcoef(ds.X, rowvar=False)
        assert corr[0, 1] == pytest.approx(0.6, abs=0.03)
        assert corr[0, 2] == pytest.approx(0.36, abs=0.03)

    def test_rep_out_of_range(self):
        with pytest.raises(ContractViolation):
            generate(scenario(reps=2), 2)

    def test_scenario_fields(self):
        sc = scenario(signal=(0.0, -0.5, 3.0))
        assert sc.support.to_list() == [1, 2]
        assert sc.min_signal == 0.5
        assert sc.alpha_n == math.sqrt(10 / 200)
        t = sc.default_tuning()
        assert t.lambda_ == pytest.approx(0.12 * math.sqrt(10 * math.log(200) / 200))
        assert t.gamma == pytest.approx(math.sqrt(10) * 200 ** -1.5)

    def test_scenario_requires_d_below_n(self):
        with pytest.raises(ContractViolation):
            scenario(n=10, d=10)

    def test_ladder_dimension(self):
        sc = SimScenario.ladder(800, [2.0, -2.0, 1.5], make_error_dist("normal"), 1, 1)
        assert sc.d == 28
        assert sc.support.to_list() == [0, 1, 2]


class TestAssumptionReport:
    def test_hand_example(self):
        report = assumption_report(Dataset(y=np.zeros(2), X=np.ones((2, 1))))
        assert report.lambda_min == pytest.approx(1.0) and report.lambda_max == pytest.approx(1.0)
        assert report.max_row_norm == 1.0
        assert report.alpha_n == math.sqrt(0.5)
        assert report.a3_ratio == pytest.approx(math.sqrt(0.5))

    def test_identity_gram(self, rng):
        q, _ = np.linalg.qr(rng.normal(size=(50, 4)))
        report = assumption_report(Dataset(y=np.zeros(50), X=math.sqrt(50) * q))
        assert report.lambda_min == pytest.approx(1.0, abs=1e-10)
        assert report.lambda_max == pytest.approx(1.0, abs=1e-10)

    def test_gaussian_design_range(self):
        ds, _ = generate(scenario(n=2000, d=20, seed=31, reps=1), 0)
        report = assumption_report(ds)
        assert 0.7 <= report.lambda_min <= 1.0
        assert 1.0 <= report.lambda_max <= 1.35

    def test_tuning_diagnostics(self):
        ds, _ = generate(scenario(n=400, d=16, reps=1), 0)
        report = assumption_report(ds, SeloTuning(lambda_=0.1, gamma=1e-3))
        assert report.gamma_bound == pytest.approx(4 * 400 ** -1.5)
        assert report.gamma_ratio == pytest.approx(1e-3 / report.gamma_bound)
        assert report.lambda_rate == pytest.approx(0.1 * 5.0)
        assert report.d_over_n == 0.04
        assert assumption_report(ds).gamma_bound is None


class TestKsDistance:
    def test_single_point(self):
        assert ks_distance([0.0]) == pytest.approx(0.5)

    def test_uniform_spacing(self):
        m = 100
        samples = stats.norm.ppf((np.arange(1, m + 1) - 0.5) / m)
        assert ks_distance(samples) == pytest.approx(0.005, abs=1e-12)

    def test_mass_far_right(self):
        assert ks_distance(np.full(10, 10.0)) == pytest.approx(1.0, abs=1e-12)

    def test_empty(self):
        with pytest.raises(ContractViolation):
            ks_distance([])


class TestRunReplications:
    def test_single_replication_identity(self):
        metrics = run_replications(scenario(reps=1))
        record = metrics.records[0]
        assert metrics.reps == 1 and metrics.failures == 0
        assert metrics.exact_recovery_rate == float(record.exact_recovery)
        assert metrics.l2_errors == (record.l2_error,)
        assert metrics.median_l2 == record.l2_error
        if record.z is not None:
            assert metrics.z_samples == (record.z,)

    def test_near_noiseless_recovery(self):
        metrics = run_replications(scenario(n=200, d=10, error=make_error_dist("normal", 1e-8, 0.5), reps=10, seed=77))
        assert metrics.exact_recovery_rate == 1.0
        assert metrics.fpr == 0.0 and metrics.tpr == 1.0
        assert metrics.z_skipped == 0

    def test_null_model_bic(self):
        sc = scenario(n=400, d=20, signal=(), reps=10, seed=13, with_bic=True)
        metrics = run_replications(sc, bic_cfg=BicConfig())
        assert metrics.bic_fpr <= 0.05
        assert metrics.z_skipped == 10 and metrics.ks_to_normal is None

    def test_deterministic_across_threads(self):
        sc = scenario(n=150, d=8, reps=6, seed=5)
        one = run_replications(sc, threads=1)
        four = run_replications(sc, threads=4)
        assert one.to_dict() == four.to_dict()
        assert one.records == four.records

    def test_records_frame(self):
        metrics = run_replications(scenario(reps=3))
        frame = metrics.records_frame()
        assert list(frame["rep"]) == [0, 1, 2]
        assert len(metrics.qq_frame()) == len(metrics.z_samples)

    def test_failures_within_limit_are_recorded(self, monkeypatch):
        real = harness.generate

        def flaky(sc, rep):
            if rep == 3:
                raise NumericalFailure("objective is not finite", iteration=0)
            return real(sc, rep)

        monkeypatch.setattr(harness, "generate", flaky)
        metrics = run_replications(scenario(n=100, d=5, reps=10))
        assert metrics.failures == 1
        assert metrics.records[3].failed and "not finite" in metrics.records[3].message
        assert len(metrics.l2_errors) == 9

    def test_too_many_failures(self, monkeypatch):
        real = harness.generate

        def flaky(sc, rep):
            if rep in (2, 7):
                raise NumericalFailure("objective is not finite", iteration=0)
            return real(sc, rep)

        monkeypatch.setattr(harness, "generate", flaky)
        with pytest.raises(SimulationError):
            run_replications(scenario(n=100, d=5, reps=10))

    def test_moderate_scale_oracle_behavior(self):
        sc = scenario(n=400, d=12, reps=100, seed=404)
        metrics = run_replications(sc, threads=0)
        assert metrics.exact_recovery_rate >= 0.85
        assert metrics.ks_to_normal <= 0.20
        assert 0.85 <= metrics.ci_coverage <= 1.0
        assert metrics.linearization_gap < 0.10

    def test_short_ladder(self):
        ladder = rate_ladder([100, 400], scenario(reps=10, seed=8))
        assert ladder.ds == (12, 21)
        assert ladder.median_l2[1] < ladder.median_l2[0]
        assert ladder.slope > 0.5
        assert list(ladder.to_frame()["n"]) == [100, 400]


@pytest.mark.slow
class TestAcceptance:
    """Desk-scale experiments on the n ladder {100, 200, 400, 800}"""

    ladder_ns = (100, 200, 400, 800)

    def test_error_rate_and_recovery_along_ladder(self):
        ladder = rate_ladder(self.ladder_ns, scenario(reps=100, seed=101), threads=0)
        # error shrinks at least as fast as alpha_n; with a fixed sparse signal
        # the oracle rate sqrt(|A0| / n) makes the slope steeper than one
        assert 0.7 <= ladder.slope <= 2.2
        rates = ladder.recovery_rates
        drops = [a - b for a, b in zip(rates, rates[1:]) if b < a]
        assert len(drops) <= 1 and all(drop <= 0.02 for drop in drops)
        assert rates[-1] >= 0.90

    @pytest.mark.parametrize("kind,param,threshold", [
        ("normal", 1.0, 0.90), ("student_t", 3.0, 0.90), ("cauchy", 1.0, 0.75),
    ])
    def test_support_recovery_heavy_tails(self, kind, param, threshold):
        sc = SimScenario.ladder(800, [2.0, -2.0, 1.5], make_error_dist(kind, param, 0.5), 202, 100)
        assert run_replications(sc, threads=0).exact_recovery_rate >= threshold

    def test_normality_and_coverage(self):
        sc = SimScenario.ladder(800, [2.0, -2.0, 1.5], make_error_dist("normal"), 303, 500)
        metrics = run_replications(sc, threads=0)
        assert metrics.ks_to_normal <= 0.10
        assert 0.92 <= metrics.ci_coverage <= 0.98

    def test_bic_selects_true_model(self):
        sc = scenario(n=800, d=40, signal=(2.0, -2.0, 2.0), reps=200, seed=404, with_bic=True)
        metrics = run_replications(sc, threads=0)
        assert metrics.bic_recovery_rate >= 0.85
