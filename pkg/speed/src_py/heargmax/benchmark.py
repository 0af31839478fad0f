import dataclasses
import math
from typing import Optional, Tuple

import numpy as np

from speed.src_py.errors import DomainError
from speed.src_py.genlap.NoiseParams import NoiseParams
from speed.src_py.genlap.sampling import sample_aggregate
from speed.src_py.genlap.streams import RandomStreams
from speed.src_py.heargmax import logger
from speed.src_py.heargmax.ArgmaxCircuitConfig import ArgmaxCircuitConfig
from speed.src_py.heargmax.circuit import argmax_circuit, decrypt_onehot, encrypt_counts
from speed.src_py.heargmax.CountingBackend import CountingBackend
from speed.src_py.heargmax.NoisyBackend import NoisyBackend

BENCHMARK_TARGET = 0.90


@dataclasses.dataclass(frozen=True)
class BenchmarkResult:
    accuracy: float
    degenerate_rate: float
    trials: int
    sigma_c: float
    bootstraps: int


def uniform_votes(n: int, k: int, trials: int, gamma: Optional[float], rng: np.random.Generator) -> np.ndarray:
    """
    Noisy histograms of n teachers voting uniformly at random over k classes, the worst case for the
    circuit since margins are small.
    :param gamma: inverse scale of the Laplace noise added to every count, None for clear counts
    :return: array of shape (trials, k)
    """
    counts = rng.multinomial(n, np.full(k, 1.0 / k), size=trials).astype(np.float64)
    if gamma is not None:
        counts += sample_aggregate(NoiseParams(gamma, 1.0, n), rng, (trials, k))
    return counts


def uniform_vote_benchmark(sigma_c: float, n: int = 250, k: int = 10, trials: int = 10_000,
                           gamma: Optional[float] = 0.1, config: ArgmaxCircuitConfig = ArgmaxCircuitConfig(),
                           seed: int = 0) -> BenchmarkResult:
    """
    Runs the argmax circuit on the noisy backend over a batch of uniform-vote queries and measures how
    often it agrees with the argmax of the same noisy counts in the clear.
    Votes and backend noise come from fixed streams of seed, so two calls differing only in sigma_c see
    the same votes and the same standard normal perturbations.
    """
    if trials < 1:
        raise DomainError("trials", trials, f"trials must be positive, got {trials}")
    streams = RandomStreams(seed)
    counts = uniform_votes(n, k, trials, gamma, streams.child("votes").generator())
    backend = CountingBackend(NoisyBackend(sigma_c, streams.child("backend").generator()))
    ciphers, _ = encrypt_counts(counts, backend, config, n)
    index, degenerate = decrypt_onehot(argmax_circuit(ciphers, backend, config), backend, config)
    accuracy = float(np.mean(index == np.argmax(counts, axis=-1)))
    return BenchmarkResult(accuracy=accuracy, degenerate_rate=float(np.mean(degenerate)), trials=trials,
                           sigma_c=float(sigma_c), bootstraps=backend.bootstraps)


def calibrate_sigma(target: float = BENCHMARK_TARGET, n: int = 250, k: int = 10, trials: int = 10_000,
                    gamma: Optional[float] = 0.1, config: ArgmaxCircuitConfig = ArgmaxCircuitConfig(),
                    seed: int = 0, iterations: int = 40,
                    bracket: Optional[Tuple[float, float]] = None) -> float:
    """
    Finds sigma_c at which the uniform-vote benchmark reaches the target accuracy, by bisection on
    log(sigma_c) with common random numbers across evaluations.
    :param bracket: (low, high) phase noise bounds; defaults to (1e-3, 30) units of 1/b_i
    :return: the calibrated sigma_c
    """
    if not (0 < target < 1):
        raise DomainError("target", target, f"target accuracy must lie in (0, 1), got {target!r}")
    b_i = config.input_modulus(n)
    low, high = bracket if bracket is not None else (1e-3 / b_i, 30.0 / b_i)

    def accuracy(sigma: float) -> float:
        return uniform_vote_benchmark(sigma, n, k, trials, gamma, config, seed).accuracy

    if accuracy(low) < target:
        logger.warning(f"Benchmark accuracy at sigma_c={low:.3g} is already below {target}")
        return low
    if accuracy(high) > target:
        logger.warning(f"Benchmark accuracy at sigma_c={high:.3g} is still above {target}")
        return high
    log_low, log_high = math.log(low), math.log(high)
    for _ in range(iterations):
        mid = 0.5 * (log_low + log_high)
        if accuracy(math.exp(mid)) >= target:
            log_low = mid
        else:
            log_high = mid
    sigma_c = math.exp(0.5 * (log_low + log_high))
    logger.info(f"Calibrated sigma_c={sigma_c:.4g} ({sigma_c * b_i:.4g} count units) for {target:.0%} accuracy",
                extra={"sigma_c": sigma_c, "n": n, "k": k, "trials": trials})
    return sigma_c


def separated_benchmark(sigma_c: float, gap: float, n: int = 250, k: int = 10, trials: int = 10_000,
                        config: ArgmaxCircuitConfig = ArgmaxCircuitConfig(), seed: int = 0) -> BenchmarkResult:
    """
    Runs the circuit on histograms whose classes are pairwise at least gap apart, the classes taking
    the values gap * j, j = 0..k-1, in a random order per query.
    """
    if not gap > 0:
        raise DomainError("gap", gap, f"gap must be positive, got {gap!r}")
    if gap * (k - 1) >= n + config.offset:
        raise DomainError("gap", gap, f"gap={gap} does not fit {k} classes in the input range for n={n}")
    streams = RandomStreams(seed)
    rng = streams.child("separated").generator()
    order = np.argsort(rng.random((trials, k)), axis=-1)
    counts = gap * order.astype(np.float64)
    backend = CountingBackend(NoisyBackend(sigma_c, streams.child("backend").generator()))
    ciphers, _ = encrypt_counts(counts, backend, config, n)
    index, degenerate = decrypt_onehot(argmax_circuit(ciphers, backend, config), backend, config)
    accuracy = float(np.mean(index == np.argmax(counts, axis=-1)))
    return BenchmarkResult(accuracy=accuracy, degenerate_rate=float(np.mean(degenerate)), trials=trials,
                           sigma_c=float(sigma_c), bootstraps=backend.bootstraps)
