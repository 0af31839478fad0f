"""
A malicious aggregator that chooses its own "noise" to learn whether a victim teacher voted k0 or k1.

The victim's characteristic chi moves its vote from k0 (chi0) to k1 (chi1). Knowing every other count,
the aggregator adds nu0 - 1/2 - n_k to every class but k0 and k1, and nu0 - 1 - nu1 to k1, so that k0
is the argmax exactly when chi = chi0. With centralised noise those offsets replace the noise and the
inference is certain; with distributed noise the teachers' secret shares blur it down to what the
differential privacy guarantee allows.
"""
import dataclasses
import math
from typing import Any, Dict, Literal, Sequence, Tuple

import numpy as np

from speed.src_py.accountant.bounds import per_query_epsilon_refined
from speed.src_py.errors import DomainError
from speed.src_py.genlap.NoiseParams import NoiseParams
from speed.src_py.genlap.sampling import sample_aggregate
from speed.src_py.protocol import logger

AttackNoise = Literal["centralised-known", "distributed"]


@dataclasses.dataclass(frozen=True)
class AttackScenario:
    """
    counts: the histogram when the victim votes k0 (chi0); under chi1 one vote moves from k0 to k1.
    """
    counts: Tuple[int, ...]
    k0: int
    k1: int

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        k = len(counts)
        if k < 2:
            raise DomainError("counts", counts, "a scenario needs at least two classes")
        if not (0 <= self.k0 < k and 0 <= self.k1 < k) or self.k0 == self.k1:
            raise DomainError("k0", (self.k0, self.k1), "k0 and k1 must be distinct classes")
        if counts[self.k0] < 1 or any(c < 0 for c in counts):
            raise DomainError("counts", counts, "counts must be non-negative and include the victim's vote for k0")
        object.__setattr__(self, "counts", counts)

    @property
    def nu0(self) -> int:
        return self.counts[self.k0]

    @property
    def nu1(self) -> int:
        return self.counts[self.k1]

    def histogram(self, chi: int) -> np.ndarray:
        counts = np.array(self.counts, dtype=np.float64)
        if chi == 1:
            counts[self.k0] -= 1
            counts[self.k1] += 1
        return counts

    def offsets(self) -> np.ndarray:
        out = self.nu0 - 0.5 - np.array(self.counts, dtype=np.float64)
        out[self.k0] = 0.0
        out[self.k1] = self.nu0 - 1.0 - self.nu1
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AttackScenario":
        return cls(tuple(data["counts"]), int(data["k0"]), int(data["k1"]))


@dataclasses.dataclass(frozen=True)
class AttackResult:
    noise: AttackNoise
    trials: int
    accuracy: float
    # the best accuracy an (epsilon, 0)-DP mechanism allows a balanced guess, e^eps / (1 + e^eps)
    dp_bound: float
    epsilon: float

    @property
    def standard_error(self) -> float:
        return math.sqrt(max(self.accuracy * (1.0 - self.accuracy), 1e-12) / self.trials)

    def consistent(self, sigmas: float = 3.0) -> bool:
        return self.accuracy <= self.dp_bound + sigmas * self.standard_error

    def to_dict(self) -> Dict[str, Any]:
        return dict(dataclasses.asdict(self), standard_error=self.standard_error, consistent=self.consistent())


def infer(scenario: AttackScenario, noisy_values: np.ndarray) -> np.ndarray:
    """The aggregator guesses chi0 exactly when k0 wins: returns 0 for chi0 and 1 for chi1 along the last axis."""
    return (np.argmax(noisy_values + scenario.offsets(), axis=-1) != scenario.k0).astype(np.int64)


def attack_demo(scenario: AttackScenario, noise: AttackNoise, params: NoiseParams, rng: np.random.Generator,
                trials: int = 10_000) -> AttackResult:
    """
    Runs the inference for trials // 2 victims with chi0 and the rest with chi1.
    :param params: gamma, n and the tau of the teachers whose shares stay secret from the aggregator
    """
    if trials < 2:
        raise DomainError("trials", trials, f"the demo needs at least 2 trials, got {trials}")
    k = len(scenario.counts)
    chi = np.repeat([0, 1], [trials // 2, trials - trials // 2])
    clear = np.where(chi[:, None] == 0, scenario.histogram(0), scenario.histogram(1))
    if noise == "centralised-known":
        noisy = clear
    elif noise == "distributed":
        noisy = clear + sample_aggregate(params, rng, (trials, k))
    else:
        raise DomainError("noise", noise, "noise must be 'centralised-known' or 'distributed'")
    accuracy = float(np.mean(infer(scenario, noisy) == chi))
    epsilon = per_query_epsilon_refined(params.gamma, params.snapped().tau)
    dp_bound = 1.0 / (1.0 + math.exp(-epsilon))
    logger.info(f"Attack with {noise} noise inferred chi with accuracy {accuracy:.4f} (bound {dp_bound:.4f})",
                extra={"noise": noise, "trials": trials, "epsilon": epsilon})
    return AttackResult(noise, trials, accuracy, dp_bound, epsilon)


def scenario_branches(scenario: AttackScenario) -> Sequence[int]:
    """The argmax under crafted offsets and no noise, for chi0 and chi1."""
    return [int(np.argmax(scenario.histogram(chi) + scenario.offsets())) for chi in (0, 1)]
