import dataclasses
import math
from typing import Any, Dict, Optional

from speed.src_py.errors import ConfigError, DomainError

DEFAULT_OFFSET = 900.0
DEFAULT_FAILURE_LOG2 = -64


def minimum_offset(gamma: float, failure_log2: float = DEFAULT_FAILURE_LOG2) -> float:
    """
    The smallest offset A with P(Y < -A) < 2^failure_log2 for Y ~ Laplace(0, 1/gamma), i.e.
    (1/2) e^(-gamma A) = 2^failure_log2. Partial sums of noise shares have lighter tails, so the same
    offset also covers tau < 1.
    """
    if not (math.isfinite(gamma) and gamma > 0):
        raise DomainError("gamma", gamma, f"gamma must be a positive real, got {gamma!r}")
    if not failure_log2 < -1:
        raise DomainError("failure_log2", failure_log2, "the failure probability must be below 1/2")
    return (-failure_log2 - 1.0) * math.log(2.0) / gamma


@dataclasses.dataclass(frozen=True)
class ArgmaxCircuitConfig:
    """
    Constants of the encrypted argmax circuit.

    offset: added to every noisy count so that honest values are non-negative
    b_i: input modulus, 2(n + 2 offset) when None
    b_theta1: output modulus of the comparison bootstraps, must exceed 2(K - 1)
    b_theta2: output modulus of the final threshold bootstraps
    sigma_c: phase noise of the noisy backend, calibrated when None
    """
    offset: float = DEFAULT_OFFSET
    b_i: Optional[float] = None
    b_theta1: int = 36
    b_theta2: int = 4
    sigma_c: Optional[float] = None

    def input_modulus(self, n: int) -> float:
        return self.b_i if self.b_i is not None else 2.0 * (n + 2.0 * self.offset)

    def resolved(self, n: int) -> "ArgmaxCircuitConfig":
        """Returns a copy with b_i fixed for n teachers."""
        return dataclasses.replace(self, b_i=self.input_modulus(n))

    def validate(self, n: int, k: int, gamma: Optional[float] = None):
        """
        :raises ConfigError: if a constant is out of range for n teachers, k classes and noise gamma
        """
        if not self.offset >= 0:
            raise ConfigError("offset", self.offset, f"offset must be non-negative, got {self.offset!r}")
        if k < 2:
            raise ConfigError("k", k, f"the argmax circuit needs at least 2 classes, got {k}")
        if k - 1 >= self.b_theta1 / 2:
            raise ConfigError("b_theta1", self.b_theta1,
                              f"b_theta1={self.b_theta1} cannot hold {k - 1} comparisons below 1/2")
        if self.b_theta2 < 2:
            raise ConfigError("b_theta2", self.b_theta2, f"b_theta2 must be at least 2, got {self.b_theta2}")
        if self.input_modulus(n) < 2.0 * (n + 2.0 * self.offset):
            raise ConfigError("b_i", self.b_i, f"b_i={self.b_i} is below 2(n + 2 offset) for n={n}")
        if self.sigma_c is not None and not self.sigma_c >= 0:
            raise ConfigError("sigma_c", self.sigma_c, f"sigma_c must be non-negative, got {self.sigma_c!r}")
        if gamma is not None and self.offset < minimum_offset(gamma):
            raise ConfigError("offset", self.offset,
                              f"offset={self.offset} is below {minimum_offset(gamma):.1f}, "
                              f"the minimum for gamma={gamma} at failure probability 2^{DEFAULT_FAILURE_LOG2}")

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)
