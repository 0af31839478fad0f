import itertools
import math

import numpy as np
import pytest

from speed.src_py.accountant import (
    MistakeInput, MomentsLedger, analyze, class_mistake_term, compose, data_dependent_threshold, ledger_for_query,
    mistake_bound, moment_per_query, per_query_epsilon, per_query_epsilon_refined, tail_bound, tail_delta,
    tail_epsilon
)
from speed.src_py.accountant.MomentsLedger import moment_terms
from speed.src_py.errors import DomainError, ShapeMismatchError
from speed.src_py.genlap import NoiseParams, sample_aggregate
from speed.src_py.protocol import VoteHistogram, unanimous_histogram


class TestPerQueryEpsilon:
    def test_classical_cost_at_tau_one(self):
        assert per_query_epsilon_refined(0.1, 1.0) == 0.2
        assert per_query_epsilon_refined(0.5, 1.0) == 1.0

    @pytest.mark.parametrize("gamma", [0.1, 0.5])
    def test_limit_in_tau(self, gamma):
        gaps = [abs(per_query_epsilon_refined(gamma, tau) - 2 * gamma) for tau in (0.9, 0.99, 0.999)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 0.1 * 2 * gamma

    def test_limit_in_gamma(self):
        values = [per_query_epsilon(gamma, 0.9) for gamma in (1e-3, 1e-4, 1e-5)]
        assert values[0] > values[1] > values[2]
        assert values[2] < 1e-3

    def test_refined_never_exceeds_first(self):
        for gamma in (0.05, 0.1, 0.5):
            for tau in (0.6, 0.75, 0.9):
                first = per_query_epsilon(gamma, tau)
                assert 0 < per_query_epsilon_refined(gamma, tau) <= first
                assert math.isfinite(first)

    def test_first_bound_only_below_half(self):
        eps = per_query_epsilon(0.1, 0.5)
        assert math.isfinite(eps) and eps > 0
        assert per_query_epsilon_refined(0.1, 0.5) == eps

    def test_monotone_in_tau(self):
        values = [per_query_epsilon_refined(0.1, tau) for tau in (0.5, 0.7, 0.9, 0.99)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("gamma, tau", [(0.1, 0.9), (0.1, 0.5)])
    def test_high_precision_reference(self, high_precision, gamma, tau):
        assert per_query_epsilon(gamma, tau) == pytest.approx(high_precision.epsilon(gamma, tau, refined=False),
                                                              rel=1e-8)
        assert per_query_epsilon_refined(gamma, tau) == pytest.approx(high_precision.epsilon(gamma, tau), rel=1e-8)

    @pytest.mark.parametrize("gamma, tau", [(0.0, 0.9), (-0.1, 0.9), (0.1, 0.0), (0.1, 1.0)])
    def test_domain(self, gamma, tau):
        with pytest.raises(DomainError):
            per_query_epsilon(gamma, tau)


class TestMistakeBound:
    def test_all_tied(self):
        assert mistake_bound(0.1, 0.9, MistakeInput((0,) * 9)) == pytest.approx(4.5)

    def test_classical_form(self):
        value = mistake_bound(0.1, 1.0, MistakeInput((250,)))
        assert value == pytest.approx((2 + 25) / (4 * math.exp(25)), rel=1e-12)

    def test_limits(self):
        for tau in (0.3, 0.9):
            assert class_mistake_term(0.1, tau, 0) == 0.5
            assert class_mistake_term(0.1, tau, 1000) < 1e-30
        # below tau = 1/2 the extra term vanishes only like x^(tau/2)
        assert class_mistake_term(0.1, 0.9, 1e-6) == pytest.approx(0.5, rel=1e-3)
        assert class_mistake_term(0.1, 0.3, 1e-30) == pytest.approx(0.5, rel=1e-3)

    def test_holder_exponent(self):
        margins = MistakeInput((10, 30))
        assert mistake_bound(0.1, 0.9, margins, holder_q=50.0) > 0
        with pytest.raises(DomainError):
            mistake_bound(0.1, 0.9, margins, holder_q=5.0)

    def test_from_counts(self):
        margins = MistakeInput.from_counts([3, 7, 7, 1])
        assert margins.true_argmax == 1
        assert margins.deltas == (4, 0, 6)

    def test_negative_margin(self):
        with pytest.raises(DomainError):
            MistakeInput((3, -1))

    @pytest.mark.slow
    def test_dominates_sampled_probability(self):
        trials = 100_000
        rng = np.random.default_rng(11)
        for gamma, tau in itertools.product((0.05, 0.1, 0.2), (0.6, 0.9)):
            params = NoiseParams(gamma, tau, 1000)
            noise = sample_aggregate(params, rng, (trials, 2))
            for delta in (5, 20, 50):
                p = float(np.mean(noise[:, 1] - noise[:, 0] >= delta))
                se = math.sqrt(max(p * (1 - p), 1.0 / trials) / trials)
                assert mistake_bound(gamma, tau, MistakeInput((delta,))) >= p - 3 * se


class TestMoments:
    def test_zero_mistake_probability(self):
        for l in (1, 5, 25):
            assert moment_per_query(0.2, 0.0, l) == 0.0

    def test_fallback_above_threshold(self):
        q = data_dependent_threshold(0.2) * (1 + 1e-9)
        for l in range(1, 26):
            assert moment_per_query(0.2, q, l) == pytest.approx(min(0.2 * l, 0.02 * l * (l + 1)), rel=1e-12)
            assert moment_terms(0.2, q, l)[1] is None

    def test_data_dependent_value(self):
        eps, q, l = 0.2, 1e-6, 25
        direct = math.log((1 - q) * ((1 - q) / (1 - math.exp(eps) * q)) ** l + q * math.exp(eps * l))
        data_independent, data_dependent = moment_terms(eps, q, l)
        assert data_dependent == pytest.approx(direct, rel=1e-9)
        assert moment_per_query(eps, q, l) == min(data_independent, data_dependent)

    @pytest.mark.parametrize("eps, q, l", [(0.0, 0.1, 1), (0.2, 1.0, 1), (0.2, -0.1, 1), (0.2, 0.1, 0)])
    def test_domain(self, eps, q, l):
        with pytest.raises(DomainError):
            moment_per_query(eps, q, l)

    def test_ledger_branch(self):
        _, branch = ledger_for_query(0.2, 1e-6)
        assert branch == "data-dependent"
        ledger, branch = ledger_for_query(0.2, 0.9)
        assert branch == "data-independent"
        assert ledger.lmax == 25


class TestComposition:
    @pytest.fixture
    def ledger(self):
        return ledger_for_query(0.2, 1e-4)[0]

    def test_identity(self, ledger):
        assert compose([ledger]) == ledger

    def test_additivity(self):
        ledger = MomentsLedger(np.full(25, 0.03))
        assert np.allclose(compose([ledger] * 100).alpha, 3.0)

    def test_two_ledgers(self, ledger):
        other = ledger_for_query(0.3, 0.01)[0]
        assert np.array_equal(compose([ledger, other]).alpha, ledger.alpha + other.alpha)
        assert compose([ledger, other]) == ledger + other

    def test_mismatch(self, ledger):
        with pytest.raises(ShapeMismatchError):
            compose([ledger, MomentsLedger.zeros(10)])
        with pytest.raises(ShapeMismatchError):
            compose([])
        assert compose([], lmax=7) == MomentsLedger.zeros(7)

    def test_negative_moment(self):
        with pytest.raises(DomainError):
            MomentsLedger(np.array([0.1, -0.1]))


class TestTailBound:
    def test_linear_moments(self):
        c = 0.3
        ledger = MomentsLedger(c * np.arange(1, 26))
        assert tail_epsilon(ledger, 1e-5) == pytest.approx(c + math.log(1e5) / 25, rel=1e-12)
        assert tail_bound(ledger, 1e-5)[1] == 25

    def test_inversion(self):
        ledger = compose([ledger_for_query(0.2, 1e-3)[0]] * 100)
        eps = tail_epsilon(ledger, 1e-5)
        assert tail_delta(ledger, eps) <= 1e-5 * (1 + 1e-9)

    def test_delta_domain(self):
        with pytest.raises(DomainError):
            tail_epsilon(MomentsLedger.zeros(), 1.0)


class TestAnalyze:
    @pytest.fixture(scope="class")
    def votes(self):
        return unanimous_histogram(250, 10, 100, seed=0)

    def test_unanimous_budget(self, votes):
        report = analyze(votes, NoiseParams(0.1, 1.0, 250), 1e-5)
        assert report.epsilon <= 1.5
        assert report.num_queries == 100
        assert report.disabled_queries == []
        assert report.best_order == 25

    def test_unanimous_budget_reference(self, votes, high_precision):
        report = analyze(votes, NoiseParams(0.1, 1.0, 250), 1e-5)
        expected = high_precision.unanimous_epsilon(0.1, 250, 10, 100, 1e-5, 25)
        assert report.epsilon == pytest.approx(expected, rel=1e-9)
        assert report.epsilon == pytest.approx(math.log(1e5) / 25, abs=1e-5)

    def test_collusion_ordering(self, votes):
        eps = [analyze(votes, NoiseParams(0.1, tau, 250), 1e-5).epsilon for tau in (1.0, 0.9, 0.7)]
        assert eps[0] < eps[1] < eps[2]

    def test_report_consistent_with_tail_bound(self, votes):
        report = analyze(votes, NoiseParams(0.1, 0.9, 250), 1e-5)
        ledger = MomentsLedger(np.array(report.alpha))
        assert report.epsilon == tail_epsilon(ledger, 1e-5)
        assert all(t.epsilon == per_query_epsilon_refined(0.1, 0.9) for t in report.per_query)

    def test_empty_session(self):
        report = analyze(VoteHistogram(250, 10, []), NoiseParams(0.1, 1.0, 250))
        assert report.epsilon == 0.0
        assert report.alpha == [0.0] * 25

    def test_disabled_branch_is_flagged(self):
        votes = VoteHistogram(250, 10, [[25] * 10, [250] + [0] * 9])
        report = analyze(votes, NoiseParams(0.1, 1.0, 250))
        assert report.disabled_queries == [0]
        assert report.per_query[0].q_raw == pytest.approx(4.5)
        assert report.per_query[0].q_bound < 1.0

    def test_snapped_tau(self, votes):
        report = analyze(votes, NoiseParams(0.1, 0.901, 250))
        assert report.tau_snapped == 0.9
        assert report.to_dict()["schema"] == "speed.privacy_report/1"

    def test_teacher_count_mismatch(self, votes):
        with pytest.raises(DomainError):
            analyze(votes, NoiseParams(0.1, 1.0, 100))


@pytest.mark.slow
class TestSmallInstanceOracle:
    """Estimates output probabilities of the noisy argmax on every pair of adjacent histograms."""

    n, k, gamma = 5, 3, 0.5
    trials = 10_000_000
    chunk = 1_000_000

    def _outcome_probabilities(self, histograms, rng):
        # every histogram sees the same noise draws, chunk by chunk
        params = NoiseParams(self.gamma, 1.0, self.n)
        hits = {h: np.zeros(self.k, dtype=np.int64) for h in histograms}
        for _ in range(self.trials // self.chunk):
            noise = sample_aggregate(params, rng, (self.chunk, self.k))
            for h in histograms:
                hits[h] += np.bincount(np.argmax(noise + np.asarray(h, dtype=np.float64), axis=1), minlength=self.k)
        return {h: counts / self.trials for h, counts in hits.items()}

    def test_log_ratio_within_cost(self):
        rng = np.random.default_rng(12)
        histograms = [h for h in itertools.product(range(self.n + 1), repeat=self.k) if sum(h) == self.n]
        probs = self._outcome_probabilities(histograms, rng)
        worst = 0.0
        for h in histograms:
            for src, dst in itertools.permutations(range(self.k), 2):
                if h[src] == 0:
                    continue
                neighbour = list(h)
                neighbour[src] -= 1
                neighbour[dst] += 1
                worst = max(worst, float(np.max(np.abs(np.log(probs[h] / probs[tuple(neighbour)])))))
        assert worst <= per_query_epsilon_refined(self.gamma, 1.0) + 0.05
