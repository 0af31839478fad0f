import dataclasses
import math

from speed.src_py.errors import DomainError


@dataclasses.dataclass(frozen=True)
class NoiseParams:
    """
    The triple governing all noise and privacy computations.

    gamma is the inverse scale of the aggregated Laplace noise, tau the ratio of teachers whose
    noise stays secret from the viewpoint under analysis, and n the number of teachers.
    """
    gamma: float
    tau: float = 1.0
    n: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise DomainError("gamma", self.gamma, f"gamma must be a positive real, got {self.gamma!r}")
        if not (0 < self.tau <= 1):
            raise DomainError("tau", self.tau, f"tau must lie in (0, 1], got {self.tau!r}")
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError("n", self.n, f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def scale(self) -> float:
        """The Laplace scale 1/gamma."""
        return 1.0 / self.gamma

    @property
    def honest_shares(self) -> int:
        """The number of secret noise shares, tau * n rounded half up."""
        return int(math.floor(self.tau * self.n + 0.5))

    def snapped(self) -> "NoiseParams":
        """
        Returns a copy with tau replaced by honest_shares / n, so that accounting and simulation
        agree on the number of noise shares.
        :raises DomainError: if tau * n rounds to zero shares
        """
        if self.honest_shares == 0:
            raise DomainError("tau", self.tau, f"tau={self.tau} leaves no noise share among n={self.n} teachers")
        return dataclasses.replace(self, tau=self.honest_shares / self.n)

    def with_gamma(self, gamma: float) -> "NoiseParams":
        return dataclasses.replace(self, gamma=gamma)
