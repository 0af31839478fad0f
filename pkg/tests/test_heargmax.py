import itertools
import math

import numpy as np
import pytest
from scipy import stats

from speed.src_py.errors import BackendError, ConfigError, DomainError, ShapeMismatchError
from speed.src_py.heargmax import (
    ArgmaxCircuitConfig, CountingBackend, IdealBackend, NoisyBackend, argmax_circuit, calibrate_sigma, compare,
    decrypt_onehot, encrypt_counts, minimum_offset, rescale, separated_benchmark, uniform_vote_benchmark
)

N = 250


@pytest.fixture
def config():
    return ArgmaxCircuitConfig().resolved(N)


@pytest.fixture
def ideal():
    return IdealBackend()


def run_circuit(counts, backend, config):
    ciphers, _ = encrypt_counts(counts, backend, config, N)
    return decrypt_onehot(argmax_circuit(ciphers, backend, config), backend, config)


class TestConfig:
    def test_default_input_modulus(self, config):
        assert config.b_i == 2 * (N + 2 * 900)

    def test_minimum_offset(self):
        assert minimum_offset(0.1) == pytest.approx(63 * math.log(2) / 0.1)
        # the tail beyond the offset is 2^-64
        assert 0.5 * math.exp(-0.1 * minimum_offset(0.1)) == pytest.approx(2.0 ** -64)

    def test_validate(self, config):
        config.validate(N, 10, gamma=0.1)
        with pytest.raises(ConfigError):
            config.validate(N, 10, gamma=0.01)
        with pytest.raises(ConfigError):
            ArgmaxCircuitConfig(b_theta1=16).validate(N, 10)
        with pytest.raises(ConfigError):
            ArgmaxCircuitConfig(b_i=1000.0).validate(N, 10)
        with pytest.raises(ConfigError):
            ArgmaxCircuitConfig(b_theta2=1).validate(N, 10)


class TestRescale:
    def test_zero(self, config):
        torus, overflow = rescale(0.0, config, N)
        assert torus == pytest.approx(900 / 4100)
        assert not overflow

    def test_upper_end(self, config):
        torus, overflow = rescale(N + 900 - 1, config, N)
        assert torus < 0.5
        assert not overflow
        assert rescale(N + 900, config, N)[1]

    def test_below_offset(self, config):
        assert rescale(-900.0, config, N) == (0.0, False)
        _, overflow = rescale(-901.0, config, N)
        assert overflow

    def test_batch(self, config):
        torus, overflow = rescale(np.array([[0.0, -901.0], [10.0, 20.0]]), config, N)
        assert torus.shape == (2, 2)
        assert overflow.tolist() == [[False, True], [False, False]]


class TestCompare:
    def _pair(self, backend, config, left, right):
        (a, b), _ = encrypt_counts(np.array([left, right]), backend, config, N)
        return a, b

    def test_ideal(self, ideal, config):
        a, b = self._pair(ideal, config, 60.0, 40.0)
        assert ideal.decode(compare(a, b, ideal, config), config.b_theta1) == 1
        assert ideal.decode(compare(b, a, ideal, config), config.b_theta1) == 0

    def test_equal_is_strictly_zero(self, ideal, config):
        a, b = self._pair(ideal, config, 40.0, 40.0)
        assert ideal.decode(compare(a, b, ideal, config), config.b_theta1) == 0

    def test_backend_mismatch(self, ideal, config):
        a, _ = self._pair(ideal, config, 1.0, 2.0)
        other = IdealBackend()
        _, b = self._pair(other, config, 1.0, 2.0)
        with pytest.raises(BackendError):
            compare(a, b, ideal, config)

    def test_noisy_flip_rate(self, config):
        gap = 1.0 / config.b_i
        sigma_eff = gap / -stats.norm.ppf(0.3)
        backend = NoisyBackend(sigma_eff / math.sqrt(2), np.random.default_rng(21))
        trials = 10_000
        counts = np.tile([41.0, 40.0], (trials, 1))
        ciphers, _ = encrypt_counts(counts, backend, config, N)
        theta = backend.decode(compare(ciphers[0], ciphers[1], backend, config), config.b_theta1)
        assert backend.sigma_eff == pytest.approx(sigma_eff)
        assert np.mean(theta == 0) == pytest.approx(0.3, abs=0.03)

    def test_negative_sigma(self):
        with pytest.raises(DomainError):
            NoisyBackend(-1.0, np.random.default_rng(0))


class TestArgmaxCircuit:
    def test_single_query(self, ideal, config):
        ciphers, _ = encrypt_counts(np.array([10.0, 50.0, 30.0]), ideal, config, N)
        out = argmax_circuit(ciphers, ideal, config)
        assert [int(ideal.decode(c, config.b_theta2)) for c in out] == [0, 1, 0]
        assert decrypt_onehot(out, ideal, config) == (1, False)

    def test_random_histograms(self, ideal, config):
        rng = np.random.default_rng(22)
        counts = rng.multinomial(N, np.full(10, 0.1), size=10_000).astype(np.float64)
        index, degenerate = run_circuit(counts, ideal, config)
        assert np.array_equal(index, np.argmax(counts, axis=1))
        assert not degenerate.any()

    def test_noisy_counts(self, ideal, config):
        rng = np.random.default_rng(23)
        counts = rng.multinomial(N, np.full(10, 0.1), size=10_000) + rng.laplace(0.0, 10.0, (10_000, 10))
        index, _ = run_circuit(counts, ideal, config)
        assert np.array_equal(index, np.argmax(counts, axis=1))

    def test_two_class_boundaries(self, ideal, config):
        pairs = np.array(list(itertools.product(range(6), repeat=2)), dtype=np.float64)
        index, degenerate = run_circuit(pairs, ideal, config)
        # ties go to the lowest index
        assert np.array_equal(index, np.argmax(pairs, axis=1))
        assert not degenerate.any()

    def test_all_tied(self, ideal, config):
        assert run_circuit(np.full(5, 50.0), ideal, config) == (0, False)

    def test_bootstrap_count(self, config):
        for k in (2, 3, 10):
            backend = CountingBackend(IdealBackend())
            ciphers, _ = encrypt_counts(np.arange(k, dtype=np.float64), backend, config, N)
            argmax_circuit(ciphers, backend, config)
            assert backend.bootstraps == k * k
            assert backend.encryptions == k

    def test_permutation_equivariance(self, ideal, config):
        rng = np.random.default_rng(24)
        for _ in range(50):
            counts = rng.permutation(np.arange(10, dtype=np.float64) * 7)
            perm = rng.permutation(10)
            winner, _ = run_circuit(counts, ideal, config)
            permuted, _ = run_circuit(counts[perm], ideal, config)
            assert perm[permuted] == winner

    def test_too_few_classes(self, ideal, config):
        ciphers, _ = encrypt_counts(np.array([1.0]), ideal, config, N)
        with pytest.raises(DomainError):
            argmax_circuit(ciphers, ideal, config)

    def test_batch_mismatch(self, ideal, config):
        a = ideal.encrypt(np.zeros(3))
        b = ideal.encrypt(np.zeros(4))
        with pytest.raises(ShapeMismatchError):
            argmax_circuit([a, b], ideal, config)


class TestDecryptOnehot:
    def _ciphers(self, backend, config, onehot):
        return [backend.encrypt(v / config.b_theta2) for v in onehot]

    @pytest.mark.parametrize("onehot, expected", [((0, 1, 0), (1, False)), ((0, 0, 0), (0, True)),
                                                  ((1, 0, 1), (0, True)), ((0, 1, 1), (1, True))])
    def test_fallbacks(self, ideal, config, onehot, expected):
        assert decrypt_onehot(self._ciphers(ideal, config, onehot), ideal, config) == expected


class TestNoisyBenchmarks:
    def test_zero_noise_is_exact(self, config):
        result = uniform_vote_benchmark(0.0, trials=2000, config=config)
        assert result.accuracy == 1.0
        assert result.bootstraps == 100

    def test_failures_grow_with_noise(self, config):
        accuracies = [uniform_vote_benchmark(s / config.b_i, trials=2000, config=config).accuracy
                      for s in (0.5, 2.0, 8.0)]
        assert accuracies[0] >= accuracies[1] >= accuracies[2]

    def test_well_separated_classes(self, config):
        sigma_c = 0.5 / config.b_i
        gap = 6 * math.sqrt(2) * sigma_c * config.b_i
        result = separated_benchmark(sigma_c, gap, trials=10_000, config=config)
        assert result.accuracy == 1.0

    def test_gap_too_wide(self, config):
        with pytest.raises(DomainError):
            separated_benchmark(0.001, 200.0, config=config)

    @pytest.mark.slow
    def test_calibrated_worst_case(self, config):
        sigma_c = calibrate_sigma(0.90, config=config, seed=0)
        result = uniform_vote_benchmark(sigma_c, config=config, seed=1)
        assert 0.88 <= result.accuracy <= 0.92
