"""Tests for threshold resolution, UTD estimation, Hill index, summaries."""

import json
import math

import numpy as np
import pytest
from scipy import stats

from layertail import (
    ParameterError,
    QuantileLevel,
    ShapeError,
    TopCount,
    UndefinedCorrelationError,
    empirical_threshold,
    hill_profile,
    hill_tail_index,
    pearson_correlation,
    replication_summary,
    resolve_top_count,
    utd_estimate,
)

# Hill estimate of the ray (2, 6, 18, 54, 162) at k = 4: the four log-ratios
# against 2 are (4, 3, 2, 1) * ln 3, so the estimate is 2 / (5 ln 3).
HILL_RAY = 0.36409569065073495


class TestThresholdResolution:
    @pytest.mark.parametrize(
        "n,q,expected",
        [
            (1000, 0.9, 100),
            (1000, 0.995, 5),
            (20000, 0.995, 100),
            (10000, 0.99, 100),
            (10, 0.75, 3),  # 10 * 0.25 + 0.5 = 3.0 rounds to 3
            (30, 0.985, 1),  # 0.45 + 0.5 = 0.95 floors to 0, clamps to 1
            (200, 0.9999, 1),
        ],
    )
    def test_quantile_to_count(self, n, q, expected):
        assert resolve_top_count(QuantileLevel(q), n) == expected

    def test_top_count_passthrough(self):
        assert resolve_top_count(TopCount(17), 100) == 17

    def test_count_must_be_below_sample_size(self):
        with pytest.raises(ParameterError):
            resolve_top_count(TopCount(5), 5)
        with pytest.raises(ParameterError):
            resolve_top_count(QuantileLevel(0.01), 10)

    def test_tiny_sample(self):
        with pytest.raises(ParameterError):
            resolve_top_count(TopCount(1), 1)

    def test_rule_validation(self):
        with pytest.raises(ParameterError):
            TopCount(0)
        with pytest.raises(ParameterError):
            QuantileLevel(1.0)
        with pytest.raises(ParameterError):
            QuantileLevel(0.0)
        with pytest.raises(ParameterError):
            resolve_top_count(0.9, 100)  # bare float is not a rule


class TestEmpiricalThreshold:
    def test_small_sample(self):
        assert empirical_threshold([1, 2, 3, 4, 5], 2) == 3.0

    def test_order_independent(self):
        assert empirical_threshold([5, 3, 1, 4, 2], 2) == 3.0

    def test_all_equal(self):
        assert empirical_threshold([7, 7, 7, 7, 7, 7], 2) == 7.0

    def test_ties_through_threshold(self):
        s = [10, 9, 8, 1, 1, 1, 1, 1, 1, 1]
        assert empirical_threshold(s, 3) == 1.0

    def test_bounds(self):
        with pytest.raises(ParameterError):
            empirical_threshold([1, 2, 3], 3)
        with pytest.raises(ParameterError):
            empirical_threshold([1, 2, 3], 0)
        with pytest.raises(ParameterError):
            empirical_threshold([1.0], 1)


class TestUtdEstimate:
    def test_comonotone(self):
        s = [5, 4, 3, 2, 1]
        est = utd_estimate(s, s, TopCount(2))
        assert est.lambda_hat == 1.0
        assert est.marginal_exceedances == 2
        assert est.joint_exceedances == 2
        assert not est.degenerate

    def test_antimonotone(self):
        est = utd_estimate([5, 4, 3, 2, 1], [1, 2, 3, 4, 5], TopCount(2))
        assert est.lambda_hat == 0.0
        assert est.joint_exceedances == 0
        assert not est.degenerate

    def test_ties_shrink_both_exceedance_sets(self):
        s1 = [10, 9, 8, 1, 1, 1, 1, 1, 1, 1]
        s2 = [10, 1, 8, 9, 1, 1, 1, 1, 1, 1]
        est = utd_estimate(s1, s2, TopCount(3))
        assert est.threshold_1 == 1.0
        assert est.threshold_2 == 1.0
        assert est.marginal_exceedances == 3
        assert est.joint_exceedances == 2
        assert est.lambda_hat == pytest.approx(2.0 / 3.0)

    def test_all_ties_degenerate(self):
        est = utd_estimate([4, 4, 4, 4], [1, 2, 3, 4], TopCount(2))
        assert est.degenerate
        assert est.lambda_hat == 0.0
        assert est.marginal_exceedances == 0

    def test_distinct_values_denominator_is_t(self):
        rng = np.random.default_rng(0)
        x = rng.random(500)
        y = rng.random(500)
        est = utd_estimate(x, y, TopCount(50))
        assert est.marginal_exceedances == 50

    def test_rank_invariance(self):
        rng = np.random.default_rng(5)
        x = rng.random(400)
        y = 0.6 * x + 0.4 * rng.random(400)
        base = utd_estimate(x, y, TopCount(40))
        warped = utd_estimate(np.exp(3 * x), y**3 + 7, TopCount(40))
        assert warped.lambda_hat == base.lambda_hat
        assert warped.marginal_exceedances == base.marginal_exceedances
        assert warped.joint_exceedances == base.joint_exceedances

    def test_joint_never_exceeds_marginal(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.integers(0, 6, size=60)
            y = rng.integers(0, 6, size=60)
            est = utd_estimate(x, y, TopCount(10))
            assert 0 <= est.joint_exceedances <= est.marginal_exceedances
            assert 0.0 <= est.lambda_hat <= 1.0

    def test_quantile_spec(self):
        s = list(range(1000))
        est = utd_estimate(s, s, QuantileLevel(0.9))
        assert est.t_n == 100
        assert est.lambda_hat == 1.0

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            utd_estimate([1, 2, 3], [1, 2], TopCount(1))

    def test_non_finite(self):
        with pytest.raises(ParameterError):
            utd_estimate([1, 2, np.nan], [1, 2, 3], TopCount(1))

    def test_json_round_trip(self):
        est = utd_estimate([5, 4, 3, 2, 1], [5, 1, 4, 2, 3], TopCount(2))
        loaded = json.loads(est.to_json())
        assert loaded == est.to_dict()
        assert loaded["t_n"] == 2
        assert set(loaded) == {
            "lambda_hat",
            "t_n",
            "threshold_1",
            "threshold_2",
            "marginal_exceedances",
            "joint_exceedances",
            "degenerate",
        }


class TestHill:
    def test_geometric_ray_exact(self):
        sample = [1, 1, 2, 6, 18, 54, 162, 1, 1, 1]
        assert hill_tail_index(sample, 4) == pytest.approx(HILL_RAY, abs=1e-12)
        assert HILL_RAY == pytest.approx(2.0 / (5.0 * math.log(3.0)), abs=1e-15)

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        x = 20.0 * (1.0 - rng.random(500)) ** (-1 / 1.1)
        a = hill_tail_index(x, 60)
        b = hill_tail_index(1000.0 * x, 60)
        assert a == pytest.approx(b, abs=1e-12)

    def test_power_equivariance(self):
        rng = np.random.default_rng(3)
        x = (1.0 - rng.random(400)) ** (-1 / 1.3)
        a = hill_tail_index(x, 50)
        assert hill_tail_index(x**2.0, 50) == pytest.approx(a / 2.0, rel=1e-12)

    def test_deterministic_profile_grid(self):
        # x_j = exp(j / (alpha * m)) makes every log-spacing 1/(alpha*m); the
        # Hill estimate at k is then alpha * m * 2 / (k + 1) ... instead just
        # check the exact closed form at each k.
        alpha, m = 1.7, 40
        x = np.exp(np.arange(1, m + 1) / (alpha * m))
        for k in (5, 10, 20):
            # mean log-ratio over the top k against x_(k+1) is (k+1)/(2*alpha*m)
            expected = 2.0 * alpha * m / (k + 1)
            assert hill_tail_index(x, k) == pytest.approx(expected, rel=1e-12)

    def test_pareto_consistency(self):
        rng = np.random.default_rng(9)
        x = 20.0 * (1.0 - rng.random(200_000)) ** (-1 / 1.1)
        assert hill_tail_index(x, 2000) == pytest.approx(1.1, abs=0.05)

    def test_all_ties_is_infinite(self):
        assert hill_tail_index([3, 3, 3, 3, 3], 3) == math.inf

    def test_profile_matches_pointwise(self):
        rng = np.random.default_rng(4)
        x = (1.0 - rng.random(300)) ** (-1 / 2.0)
        ks = [5, 10, 25, 50]
        prof = hill_profile(x, ks)
        assert prof.shape == (4,)
        for k, v in zip(ks, prof):
            assert v == hill_tail_index(x, k)

    def test_domain_errors(self):
        with pytest.raises(ParameterError):
            hill_tail_index([1, 2, 3], 3)  # needs k+1 points
        with pytest.raises(ParameterError):
            hill_tail_index([1, 2, 3, 4], 0)
        with pytest.raises(ParameterError):
            hill_tail_index([-1, 0, 2, 3], 3)  # nonpositive in the top window


class TestPearson:
    def test_hand_value(self):
        assert pearson_correlation([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5)

    def test_perfect_correlation(self):
        x = [1.0, 2.0, 4.0, 8.0]
        assert pearson_correlation(x, [3 * v + 1 for v in x]) == pytest.approx(1.0)
        assert pearson_correlation(x, [-2 * v for v in x]) == pytest.approx(-1.0)

    def test_matches_scipy(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=200)
        y = 0.3 * x + rng.normal(size=200)
        expected = stats.pearsonr(x, y).statistic
        assert pearson_correlation(x, y) == pytest.approx(expected, abs=1e-12)

    def test_zero_variance(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson_correlation([2, 2, 2], [1, 2, 3])

    def test_shape_and_size_errors(self):
        with pytest.raises(ShapeError):
            pearson_correlation([1, 2], [1, 2, 3])
        with pytest.raises(ParameterError):
            pearson_correlation([1], [2])


class TestReplicationSummary:
    def test_two_point_example(self):
        s = replication_summary([0.0, 1.0], truth=0.5, t_n=100)
        assert s.mean == pytest.approx(0.5)
        assert s.mse == pytest.approx(0.25)
        assert s.scaled_variance == pytest.approx(50.0)  # ddof=1 variance is 0.5

    def test_low_spread_example(self):
        s = replication_summary([0.4, 0.6], truth=0.5, t_n=100)
        assert s.mse == pytest.approx(0.01)
        assert s.scaled_variance == pytest.approx(2.0)

    def test_bias_variance_identity(self):
        rng = np.random.default_rng(8)
        est = rng.random(250)
        truth = 0.3
        t_n = 50
        s = replication_summary(est, truth, t_n)
        n = est.size
        bias_sq = (s.mean - truth) ** 2
        assert s.mse == pytest.approx(
            bias_sq + (n - 1) / n * s.scaled_variance / t_n, abs=1e-10
        )

    def test_errors(self):
        with pytest.raises(ParameterError):
            replication_summary([0.5], truth=0.5, t_n=10)
        with pytest.raises(ParameterError):
            replication_summary([0.5, np.inf], truth=0.5, t_n=10)
        with pytest.raises(ParameterError):
            replication_summary([0.4, 0.6], truth=0.5, t_n=0)


class TestUtdOnCopulaSamples:
    def test_estimator_tracks_closed_form_truth(self):
        # strongly dependent uniforms: the estimator at a deep threshold should
        # land near 2 - 2**(1/theta) for theta = 2 (0.5857...)
        from layertail import sample_gumbel_uniforms

        rng = np.random.default_rng(13)
        reps, hits = 60, []
        for _ in range(reps):
            u = sample_gumbel_uniforms(20_000, 2, theta=2.0, rng=rng)
            hits.append(utd_estimate(u[:, 0], u[:, 1], TopCount(100)).lambda_hat)
        assert np.mean(hits) == pytest.approx(0.5857864376, abs=0.02)
