import math

import numpy as np
import pytest
from scipy import integrate, special, stats

from speed.src_py.accountant import per_query_epsilon, per_query_epsilon_refined
from speed.src_py.errors import DomainError
from speed.src_py.genlap import (
    GenLapDist, NoiseParams, QuadratureSettings, RandomStreams, distribution_check, eval_I, eval_I0, head_integral,
    sample_aggregate, sample_share, tail_integral, tail_integral_iterated, total_integral
)
from speed.src_py.genlap.checks import reference_cdf


class TestNoiseParams:
    def test_snapping(self):
        assert NoiseParams(0.1, 0.9, 250).snapped().tau == 0.9
        assert NoiseParams(0.1, 0.901, 250).snapped().tau == 225 / 250
        # half a share rounds up
        assert NoiseParams(0.1, 0.5, 5).honest_shares == 3

    def test_no_share_left(self):
        with pytest.raises(DomainError):
            NoiseParams(0.1, 0.001, 250).snapped()

    @pytest.mark.parametrize("gamma, tau, n", [(0.0, 1.0, 1), (-1.0, 1.0, 1), (0.1, 0.0, 1), (0.1, 1.2, 1),
                                               (0.1, 1.0, 0), (0.1, 1.0, 2.5)])
    def test_domain(self, gamma, tau, n):
        with pytest.raises(DomainError):
            NoiseParams(gamma, tau, n)


class TestKernel:
    def test_tau_one(self):
        assert eval_I(1.0, 3.7) == 0.5
        assert eval_I(1.0, 0.0) == 0.5

    def test_closed_form_at_zero(self):
        assert eval_I0(0.9) == pytest.approx(special.gamma(0.8) / 2 ** 0.8, rel=1e-12)
        # I is continuous at 0 for tau > 1/2
        assert eval_I(0.9, 1e-9) == pytest.approx(eval_I0(0.9), rel=1e-5)

    def test_direct_integration_agrees(self):
        direct = QuadratureSettings(rel_tol=1e-9, singularity="direct")
        assert eval_I(0.9, 0.2) == pytest.approx(eval_I(0.9, 0.2, direct), rel=1e-7)

    def test_high_precision_reference(self, high_precision):
        assert eval_I(0.9, 0.2) == pytest.approx(high_precision.kernel(0.9, 0.2), rel=1e-9)
        assert eval_I(0.6, 3.0) == pytest.approx(high_precision.kernel(0.6, 3.0), rel=1e-9)

    def test_decreasing(self):
        for tau in (0.3, 0.6, 0.9):
            values = [eval_I(tau, v) for v in (0.05, 0.2, 1.0, 5.0, 20.0)]
            assert all(a > b for a, b in zip(values, values[1:]))

    def test_upper_bound(self):
        assert eval_I(0.6, 10.0) <= 10 ** -0.4 * special.gamma(0.6) / 2 ** 0.6

    def test_log_ratio_monotone(self):
        # v -> I(v) / I(v + beta) is non-increasing
        tau, gamma = 0.7, 0.1
        grid = np.linspace(0.05, 10.0, 25)
        for beta in (0.1, 1.0, 2 * gamma):
            ratios = [eval_I(tau, v) / eval_I(tau, v + beta) for v in grid]
            assert all(a >= b * (1 - 1e-9) for a, b in zip(ratios, ratios[1:]))

    @pytest.mark.parametrize("tau, v", [(0.5, 0.0), (0.3, 0.0), (0.0, 1.0), (1.2, 1.0), (0.9, -1.0)])
    def test_domain(self, tau, v):
        with pytest.raises(DomainError):
            eval_I(tau, v)


class TestTailIntegral:
    def test_tau_one(self):
        assert tail_integral(1.0, 0.0) == 0.5
        assert tail_integral(1.0, 0.2) == pytest.approx(math.exp(-0.2) / 2, rel=1e-15)

    def test_decreasing(self):
        values = [tail_integral(0.9, a) for a in (0.0, 0.2, 1.0, 4.0)]
        assert all(x > y > 0 for x, y in zip(values, values[1:]))

    def test_head_and_tail_sum_to_total(self):
        for tau in (0.6, 0.75, 0.95):
            for b in (0.1, 0.2, 2.0):
                assert head_integral(tau, b) + tail_integral(tau, b) == pytest.approx(total_integral(tau), rel=1e-8)

    def test_single_point_against_iterated(self):
        assert tail_integral(0.9, 0.2) == pytest.approx(tail_integral_iterated(0.9, 0.2), rel=1e-9)

    @pytest.mark.parametrize("tau, a", [(0.9, 0.2), (0.5, 0.1), (0.7, 2.0)])
    def test_high_precision_reference(self, high_precision, tau, a):
        assert tail_integral(tau, a) == pytest.approx(high_precision.tail(tau, a), rel=1e-9)

    @pytest.mark.slow
    def test_grid_against_iterated(self):
        taus = np.linspace(0.6, 0.99, 10)
        offsets = (0.0, 0.05, 0.2, 1.0, 5.0)
        for tau in taus:
            for a in offsets:
                assert tail_integral(tau, a) == pytest.approx(tail_integral_iterated(tau, a), rel=1e-9)

    def test_negative_offset(self):
        with pytest.raises(DomainError):
            tail_integral(0.9, -0.1)


class TestGenLapDist:
    @pytest.fixture
    def dist(self):
        return GenLapDist(NoiseParams(0.1, 0.9, 250))

    def test_laplace_density(self):
        laplace = GenLapDist(NoiseParams(0.1, 1.0))
        assert laplace.density(0.0) == pytest.approx(0.05, rel=1e-12)
        assert laplace.density(7.0) == pytest.approx(0.05 * math.exp(-0.7), rel=1e-8)

    def test_laplace_cdf(self):
        laplace = GenLapDist(NoiseParams(0.1, 1.0))
        assert laplace.cdf(5.0) == pytest.approx(1 - math.exp(-0.5) / 2, rel=1e-12)
        assert laplace.cdf(0.0) == 0.5

    def test_density_even(self, dist):
        assert dist.density(1.3) == dist.density(-1.3)
        assert dist.density(1.3) > 0

    def test_density_matches_kernel(self, dist):
        u = 4.2
        expected = 0.1 / special.gamma(0.9) ** 2 * math.exp(-0.42) * eval_I(0.9, 0.42)
        assert dist.density(u) == pytest.approx(expected, rel=1e-10)

    def test_density_integrates_to_one(self, dist):
        half, _ = integrate.quad(dist.density, 0.0, 600.0, points=[1.0, 10.0, 50.0], limit=200, epsrel=1e-10)
        assert 2 * half == pytest.approx(1.0, abs=1e-8)

    def test_density_unbounded_at_origin(self):
        with pytest.raises(DomainError):
            GenLapDist(NoiseParams(0.1, 0.5, 250)).density(0.0)

    def test_cdf_symmetry(self, dist):
        assert dist.cdf(2.0) + dist.cdf(-2.0) == pytest.approx(1.0, abs=1e-9)
        for t in np.linspace(-500.0, 500.0, 21):
            assert dist.cdf(t) + dist.cdf(-t) == pytest.approx(1.0, abs=1e-9)

    def test_cdf_monotone(self, dist):
        values = [dist.cdf(t) for t in np.linspace(-100.0, 100.0, 41)]
        assert all(a <= b for a, b in zip(values, values[1:]))
        assert 0.0 <= values[0] and values[-1] <= 1.0

    @pytest.mark.parametrize("tau", [0.3, 0.6, 0.9])
    @pytest.mark.parametrize("gamma", [0.05, 0.1, 0.5])
    def test_ratio_bounded_by_privacy_cost(self, gamma, tau):
        dist = GenLapDist(NoiseParams(gamma, tau, 10))
        argmax, max_ratio = dist.maximize_ratio()
        # the ratio peaks between one vote below the origin and the origin
        assert -1.0 - 1e-5 <= argmax <= 1e-5
        assert math.log(max_ratio) <= per_query_epsilon(gamma, tau) + 1e-6
        assert math.log(max_ratio) <= per_query_epsilon_refined(gamma, tau) + 1e-6


class TestSampling:
    def test_reproducible_streams(self):
        streams = RandomStreams(42)
        first = streams.child("query", 3).generator().random(4)
        assert np.array_equal(first, RandomStreams(42).child("query", 3).generator().random(4))
        assert not np.array_equal(first, streams.child("query", 4).generator().random(4))

    def test_single_share_is_laplace(self):
        rng = np.random.default_rng(1)
        shares = sample_share(0.1, 1, rng, 100_000)
        assert stats.kstest(shares, stats.laplace(scale=10.0).cdf).statistic < 0.01

    @pytest.mark.slow
    def test_share_moments(self):
        rng = np.random.default_rng(2)
        shares = sample_share(0.1, 250, rng, 10_000_000)
        sigma = math.sqrt(0.8)
        assert abs(np.mean(shares)) < 4 * sigma / math.sqrt(shares.size)
        # the shares are strongly leptokurtic, so the variance band is wider than for the aggregate
        assert np.var(shares) == pytest.approx(0.8, rel=0.035)

    def test_partial_aggregate_variance(self):
        rng = np.random.default_rng(3)
        draws = sample_aggregate(NoiseParams(0.1, 0.9, 250), rng, 1_000_000)
        assert np.var(draws) == pytest.approx(180.0, rel=0.02)

    def test_methods_agree(self):
        params = NoiseParams(0.5, 0.8, 40)
        shares = sample_aggregate(params, np.random.default_rng(4), 50_000, "shares")
        collapsed = sample_aggregate(params, np.random.default_rng(5), 50_000, "collapsed")
        assert stats.ks_2samp(shares, collapsed).statistic < 0.015

    def test_no_share(self):
        with pytest.raises(DomainError):
            sample_aggregate(NoiseParams(0.1, 0.001, 250), np.random.default_rng(0))

    @pytest.mark.slow
    def test_aggregate_is_laplace(self):
        check = distribution_check(NoiseParams(0.1, 1.0, 250), 1_000_000, np.random.default_rng(6))
        assert check.expected_variance == pytest.approx(200.0)
        assert check.variance_rel_error < 0.02
        assert check.ks_statistic < 0.005
        assert check.passed()

    @pytest.mark.slow
    def test_aggregate_median(self):
        draws = sample_aggregate(NoiseParams(0.1, 1.0, 250), np.random.default_rng(7), 1_000_000)
        assert np.mean(draws <= 0) == pytest.approx(0.5, abs=0.002)

    @pytest.mark.slow
    def test_partial_aggregate_against_reference(self):
        params = NoiseParams(0.1, 0.9, 250)
        draws = sample_aggregate(params, np.random.default_rng(8), 200_000)
        assert stats.kstest(draws, reference_cdf(params)).statistic < 0.01

    def test_wrong_reference_fails(self):
        check = distribution_check(NoiseParams(0.1, 1.0, 250), 20_000, np.random.default_rng(9),
                                   reference_gamma=0.05, method="collapsed")
        assert not check.passed()

    def test_too_few_samples(self):
        with pytest.raises(DomainError):
            distribution_check(NoiseParams(0.1, 1.0, 250), 100, np.random.default_rng(0))
