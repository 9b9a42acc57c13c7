import numpy as np
import pytest

from speclab.ensembles import EnsembleTag
from speclab.errors import ContractError
from speclab.experiments import (
    ExperimentPlan,
    fit_loglog,
    run_concentration_experiment,
    run_identdist_experiment,
    run_lipschitz_suite,
    run_moment_experiment,
    run_rate_experiment,
    two_sample_ks_critical,
    wilson_interval,
)

SEED = 1234


class TestPlan:
    def test_k_rule_half(self):
        plan = ExperimentPlan(EnsembleTag.COMPRESSION, (8, 9), 4, SEED, k_rule="half")
        assert plan.k_of(8) == 4
        assert plan.k_of(9) == 5

    def test_k_rule_fixed(self):
        plan = ExperimentPlan(EnsembleTag.COMPRESSION, (8,), 4, SEED, k_rule="fixed:3")
        assert plan.k_of(8) == 3

    def test_invalid_k_rule(self):
        with pytest.raises(ContractError):
            ExperimentPlan(EnsembleTag.COMPRESSION, (8,), 4, SEED, k_rule="thirds")

    def test_null_k_rule_defaults_to_half(self):
        plan = ExperimentPlan(EnsembleTag.COMPRESSION, (8,), 4, SEED)
        assert plan.k_of(8) == 4

    def test_empty_grid_rejected(self):
        with pytest.raises(ContractError):
            ExperimentPlan(EnsembleTag.UNITARY, (), 4, SEED)


class TestFitLoglog:
    def test_pure_power_law(self):
        xs = np.array([1.0, 2.0, 4.0, 8.0])
        fit = fit_loglog(list(zip(xs, xs**2)))
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_constant(self):
        fit = fit_loglog([(1.0, 5.0), (2.0, 5.0), (4.0, 5.0)])
        assert fit.slope == pytest.approx(0.0, abs=1e-12)
        assert fit.intercept == pytest.approx(np.log(5.0), abs=1e-12)

    def test_noisy_rate(self):
        rng = np.random.default_rng(0)
        xs = np.array([8.0, 16, 32, 64, 128, 256])
        ys = 3.0 * xs ** (-2 / 3) * np.exp(rng.normal(0, 0.02, xs.size))
        fit = fit_loglog(list(zip(xs, ys)))
        assert -0.75 < fit.slope < -0.59

    def test_too_few_points(self):
        with pytest.raises(ContractError):
            fit_loglog([(1.0, 1.0), (2.0, 0.5)])

    def test_nonpositive_rejected(self):
        with pytest.raises(ContractError):
            fit_loglog([(1.0, 1.0), (2.0, 0.0), (4.0, 1.0)])


class TestWilson:
    def test_half(self):
        low, high = wilson_interval(50, 100)
        assert low < 0.5 < high
        assert high - low < 0.25

    def test_zero_successes(self):
        low, high = wilson_interval(0, 100)
        assert low <= 1e-12
        assert high < 0.05

    def test_all_successes(self):
        low, high = wilson_interval(100, 100)
        assert high == pytest.approx(1.0)
        assert low > 0.95


class TestRateExperiment:
    def test_reproducible_and_worker_independent(self):
        plan = ExperimentPlan(EnsembleTag.UNITARY, (4, 8, 16), 10, SEED)
        r1 = run_rate_experiment(plan, workers=1)
        r2 = run_rate_experiment(plan, workers=3)
        assert [rec.value for rec in r1.records] == [rec.value for rec in r2.records]
        assert r1.fit.slope == r2.fit.slope

    def test_short_grid_skips_fit(self):
        plan = ExperimentPlan(EnsembleTag.UNITARY, (4, 8), 5, SEED)
        res = run_rate_experiment(plan)
        assert res.fit is None
        assert any("fewer than 3" in w for w in res.warnings)

    def test_record_layout(self):
        plan = ExperimentPlan(EnsembleTag.SU, (4,), 6, SEED)
        res = run_rate_experiment(plan)
        assert len(res.records) == 6
        assert {rec.statistic for rec in res.records} == {"d1"}
        assert [rec.replicate for rec in res.records] == list(range(6))
        assert all(rec.value > 0 for rec in res.records)

    def test_line_model_split_sample_is_disjoint(self):
        # measured replicates start at m, so none of the pool keys reappear
        plan = ExperimentPlan(EnsembleTag.RANDOMIZED_SUM, (8,), 5, SEED)
        res = run_rate_experiment(plan)
        d1_reps = [rec.replicate for rec in res.records if rec.statistic == "d1"]
        assert d1_reps == list(range(5, 10))

    def test_randomized_sum_reports_weyl(self):
        plan = ExperimentPlan(EnsembleTag.RANDOMIZED_SUM, (8,), 4, SEED)
        res = run_rate_experiment(plan)
        weyl = [rec for rec in res.records if rec.statistic == "weyl_violation"]
        assert len(weyl) == 4
        assert all(rec.value == 0.0 for rec in weyl)

    def test_compression_abscissa_is_kn(self):
        plan = ExperimentPlan(
            EnsembleTag.COMPRESSION, (8, 16, 32), 5, SEED, k_rule="half"
        )
        res = run_rate_experiment(plan)
        assert [s.x for s in res.summaries] == [32.0, 128.0, 512.0]

    def test_means_decrease_with_n(self):
        plan = ExperimentPlan(EnsembleTag.UNITARY, (4, 16, 64), 20, SEED)
        res = run_rate_experiment(plan)
        means = [s.mean for s in res.summaries]
        assert means[0] > means[1] > means[2]


class TestConcentration:
    def test_tails_and_fit(self):
        plan = ExperimentPlan(EnsembleTag.UNITARY, (8, 16, 32), 40, SEED,
                              t_grid=(0.0, 10.0))
        res = run_concentration_experiment(plan, workers=2)
        by_key = {(t.n, t.t): t for t in res.tails}
        for n in (8, 16, 32):
            # t = 0 captures everything at or above the mean, huge t nothing
            assert 0.2 <= by_key[(n, 0.0)].p_hat <= 0.8
            assert by_key[(n, 10.0)].p_hat == 0.0
            assert by_key[(n, 0.0)].wilson_low <= by_key[(n, 0.0)].p_hat
        assert res.std_fit is not None
        assert res.std_fit.slope < -0.5

    def test_std_decreases(self):
        plan = ExperimentPlan(EnsembleTag.UNITARY, (8, 64), 40, SEED, t_grid=(0.0,))
        res = run_concentration_experiment(plan)
        stds = dict(res.std_by_n)
        assert stds[64] < stds[8]


class TestMoments:
    def test_su_low_moments_zero(self):
        plan = ExperimentPlan(EnsembleTag.SU, (6,), 2000, SEED)
        ests = run_moment_experiment(plan, 3)
        assert all(e.zero_consistent for e in ests)
        assert [e.k for e in ests] == [1, 2, 3]

    def test_so_alternates(self):
        plan = ExperimentPlan(EnsembleTag.SO, (8,), 2000, SEED)
        ests = run_moment_experiment(plan, 4)
        assert ests[0].zero_consistent and ests[2].zero_consistent
        assert ests[1].bounded_consistent and ests[3].bounded_consistent
        assert abs(ests[1].mean_re - 1.0) < 0.2

    def test_k_must_stay_below_n(self):
        plan = ExperimentPlan(EnsembleTag.UNITARY, (4,), 10, SEED)
        with pytest.raises(ContractError):
            run_moment_experiment(plan, 4)


class TestIdentDist:
    def test_critical_value_formula(self):
        # asymptotic two-sample threshold at level 0.01
        expected = np.sqrt(-0.5 * np.log(0.005)) * np.sqrt(2 / 300)
        assert two_sample_ks_critical(300, 300) == pytest.approx(expected)

    def test_matched_accepts(self):
        res = run_identdist_experiment(16, 400, SEED)
        assert res.accept
        assert res.samples_per_side == 400

    def test_mismatched_rejects(self):
        res = run_identdist_experiment(16, 400, SEED,
                                       ensemble_b=EnsembleTag.UNITARY, n_b=32)
        assert not res.accept


class TestLipschitzSuite:
    def test_no_violations_small_run(self):
        report = run_lipschitz_suite(trials=100, n_max=12, seed=SEED)
        assert report.trials == 100
        assert report.total == 0

    def test_report_fields(self):
        report = run_lipschitz_suite(trials=10, n_max=8, seed=SEED)
        assert report.hw_violations == 0
        assert report.conjugation_violations == 0
        assert report.compression_violations == 0
        assert report.weyl_violations == 0
