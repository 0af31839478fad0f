import dataclasses
import math
from functools import cached_property
from typing import Tuple

from scipy import optimize, special

from speed.src_py.errors import DomainError
from speed.src_py.genlap.NoiseParams import NoiseParams
from speed.src_py.genlap.quadrature import QuadratureSettings, eval_I, tail_integral


@dataclasses.dataclass(frozen=True)
class GenLapDist:
    """
    The law of a sum of tau * n Gamma-difference noise shares: a generalized Laplace distribution with
    density L e^(-gamma |u|) I_tau(gamma |u|), L = gamma / Gamma(tau)^2. At tau = 1 it is Laplace(0, 1/gamma).
    """
    params: NoiseParams
    settings: QuadratureSettings = dataclasses.field(default_factory=QuadratureSettings)

    @property
    def gamma(self) -> float:
        return self.params.gamma

    @property
    def tau(self) -> float:
        return self.params.tau

    @cached_property
    def gamma_tau_sq(self) -> float:
        return float(special.gamma(self.tau)) ** 2

    @cached_property
    def normaliser(self) -> float:
        """L = gamma / Gamma(tau)^2."""
        return self.gamma / self.gamma_tau_sq

    def density(self, u: float) -> float:
        """
        :raises DomainError: at u = 0 when tau <= 1/2, where the density is unbounded
        """
        if u == 0 and self.tau <= 0.5:
            raise DomainError("u", u, f"the density is unbounded at 0 for tau={self.tau} <= 1/2")
        x = self.gamma * abs(u)
        return self.normaliser * math.exp(-x) * eval_I(self.tau, x, self.settings)

    def _upper_tail(self, t: float) -> float:
        # P(Y > t) for t >= 0
        return tail_integral(self.tau, self.gamma * t, self.settings) / self.gamma_tau_sq

    def survival(self, t: float) -> float:
        """1 - F(t), without cancellation for large positive t."""
        if t == 0:
            return 0.5
        if t > 0:
            return self._upper_tail(t)
        return 1.0 - self._upper_tail(-t)

    def cdf(self, t: float) -> float:
        if t == 0:
            return 0.5
        if t > 0:
            return 1.0 - self._upper_tail(t)
        return self._upper_tail(-t)

    def ratio_g(self, t: float, a: float = 2.0) -> float:
        """g(t) = (1 - F(t)) / (1 - F(t + a)); its supremum bounds the privacy loss of the noisy argmax."""
        return self.survival(t) / self.survival(t + a)

    def maximize_ratio(self, a: float = 2.0, bracket: Tuple[float, float] | None = None) -> Tuple[float, float]:
        """
        Numerically locates the maximum of ratio_g.
        :param a: the shift in g
        :param bracket: the search interval, [-a, a] by default
        :return: (argmax, max)
        """
        lower, upper = bracket if bracket is not None else (-a, a)
        res = optimize.minimize_scalar(lambda t: -self.ratio_g(t, a), bounds=(lower, upper), method="bounded",
                                       options={"xatol": 1e-6})
        return float(res.x), float(-res.fun)
