import mpmath as mp
import pytest


class HighPrecision:
    """Reference values of the noise integrals and the privacy costs, in multiple precision arithmetic."""

    def __init__(self, dps: int = 30):
        self.dps = dps

    @staticmethod
    def _kernel(tau, v):
        # I(v) = int_0^inf (t + v)^(tau - 1) t^(tau - 1) e^(-2t) dt
        return mp.quad(lambda t: (t + v) ** (tau - 1) * t ** (tau - 1) * mp.exp(-2 * t), [0, v, v + 1, mp.inf])

    @staticmethod
    def _tail(tau, a):
        # int_a^inf e^(-v) I(v) dv; the inner integral is the upper incomplete gamma function
        return mp.quad(lambda t: t ** (tau - 1) * mp.exp(-t) * mp.gammainc(tau, t + a), [0, 1, mp.inf])

    def kernel(self, tau: float, v: float) -> float:
        with mp.workdps(self.dps):
            return float(self._kernel(mp.mpf(tau), mp.mpf(v)))

    def tail(self, tau: float, a: float) -> float:
        with mp.workdps(self.dps):
            return float(self._tail(mp.mpf(tau), mp.mpf(a)))

    def epsilon(self, gamma: float, tau: float, refined: bool = True) -> float:
        """The per-query privacy cost; with refined set and tau > 1/2, the smaller of both bounds."""
        with mp.workdps(self.dps):
            gamma, tau = mp.mpf(gamma), mp.mpf(tau)
            total = mp.gamma(tau) ** 2 / 2
            far = self._tail(tau, 2 * gamma)
            head = total - self._tail(tau, gamma)
            eps = mp.log1p(2 * head / far)
            if not refined or tau <= 0.5:
                return float(eps)
            kernel_at_zero = mp.gamma(2 * tau - 1) / 2 ** (2 * tau - 1)
            g0 = total / far
            slope = total * mp.exp(-2 * gamma) * self._kernel(tau, 2 * gamma) - kernel_at_zero * far
            dg0 = gamma * slope / far ** 2
            return float(min(eps, mp.log(g0 - dg0)))

    def unanimous_epsilon(self, gamma: float, n: int, k: int, queries: int, delta: float, lmax: int) -> float:
        """
        The composed epsilon of unanimous queries under plain Laplace noise: each has margin n over
        the k - 1 other classes and costs 2 gamma.
        """
        with mp.workdps(self.dps):
            eps = 2 * mp.mpf(gamma)
            x = mp.mpf(gamma) * n
            q = (k - 1) * mp.exp(-x) * (mp.mpf(0.5) + x / 4)
            data_dependent = q < mp.expm1(eps) / mp.expm1(2 * eps)
            best = mp.inf
            for l in range(1, lmax + 1):
                alpha = min(eps * l, eps ** 2 * l * (l + 1) / 2)
                if data_dependent:
                    moment = mp.log((1 - q) * ((1 - q) / (1 - mp.exp(eps) * q)) ** l + q * mp.exp(eps * l))
                    alpha = min(alpha, max(moment, 0))
                best = min(best, (queries * alpha + mp.log(1 / mp.mpf(delta))) / l)
            return float(best)


@pytest.fixture(scope="session")
def high_precision() -> HighPrecision:
    return HighPrecision()
