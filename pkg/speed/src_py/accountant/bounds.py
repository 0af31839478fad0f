"""Per-query privacy cost of the distributed report-noisy-max and the bound on its mistake probability."""
import dataclasses
import math
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import special

from speed.src_py.accountant import logger
from speed.src_py.errors import DomainError
from speed.src_py.genlap.quadrature import (
    DEFAULT_SETTINGS, QuadratureSettings, check_tau, eval_I, eval_I0, head_integral, tail_integral, total_integral
)

# below this tau the refined bound rests on slowly converging quadrature near I(0)
REFINED_WARNING_TAU = 0.55


def _check_gamma(gamma: float):
    if not (math.isfinite(gamma) and gamma > 0):
        raise DomainError("gamma", gamma, f"gamma must be a positive real, got {gamma!r}")


@lru_cache(maxsize=256)
def _per_query_epsilon(gamma: float, tau: float, settings: QuadratureSettings) -> float:
    head = head_integral(tau, gamma, settings)
    tail = tail_integral(tau, 2.0 * gamma, settings)
    return math.log1p(2.0 * head / tail)


def per_query_epsilon(gamma: float, tau: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """
    The first per-query bound: log(1 + 2 int_0^gamma e^(-v) I(v) dv / int_(2 gamma)^inf e^(-v) I(v) dv).
    :raises DomainError: if gamma <= 0 or tau is outside (0, 1)
    """
    _check_gamma(gamma)
    check_tau(tau, upper_open=True)
    return _per_query_epsilon(float(gamma), float(tau), settings)


def ratio_at_origin(gamma: float, tau: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> Tuple[float, float]:
    """
    g(0) and g'(0) for g(t) = (1 - F(t)) / (1 - F(t + 2)), defined for tau > 1/2.
    :return: (g(0), g'(0))
    """
    tail = tail_integral(tau, 2.0 * gamma, settings)
    total = total_integral(tau)
    g0 = total / tail
    numerator = total * math.exp(-2.0 * gamma) * eval_I(tau, 2.0 * gamma, settings) - eval_I0(tau) * tail
    dg0 = gamma * numerator / tail ** 2
    return g0, dg0


@lru_cache(maxsize=256)
def _per_query_epsilon_refined(gamma: float, tau: float, settings: QuadratureSettings) -> float:
    eps = _per_query_epsilon(gamma, tau, settings)
    if tau <= 0.5:
        # g is not differentiable at 0, only the first bound holds
        return eps
    if tau < REFINED_WARNING_TAU:
        logger.warning(f"Refined bound at tau={tau} relies on slowly converging quadrature near I(0)",
                       extra={"gamma": gamma, "tau": tau})
    g0, dg0 = ratio_at_origin(gamma, tau, settings)
    candidate = g0 - dg0
    if not (math.isfinite(candidate) and candidate > 0):
        logger.warning(f"Refined bound undefined at gamma={gamma}, tau={tau}; using the first bound")
        return eps
    return min(eps, math.log(candidate))


def per_query_epsilon_refined(gamma: float, tau: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """
    The refined per-query cost min(epsilon, log(g(0) - g'(0))).
    Falls back to per_query_epsilon for tau <= 1/2 and is exactly 2 gamma, the classical
    report-noisy-max cost, at tau = 1.
    :raises DomainError: if gamma <= 0 or tau is outside (0, 1]
    """
    _check_gamma(gamma)
    check_tau(tau)
    if tau == 1.0:
        return 2.0 * gamma
    return _per_query_epsilon_refined(float(gamma), float(tau), settings)


@dataclasses.dataclass(frozen=True)
class MistakeInput:
    """The margins Delta_k = n_(k*) - n_k of the true argmax k* over every other class."""
    deltas: Tuple[int, ...]
    true_argmax: Optional[int] = None

    def __post_init__(self):
        deltas = tuple(int(d) for d in self.deltas)
        if any(d < 0 for d in deltas):
            raise DomainError("deltas", self.deltas, "margins to the true argmax must be non-negative")
        object.__setattr__(self, "deltas", deltas)

    @property
    def n_classes(self) -> int:
        return len(self.deltas) + 1

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "MistakeInput":
        """Builds the margins from a clear vote histogram, the true argmax taken at the lowest index on ties."""
        counts = np.asarray(counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size < 2:
            raise DomainError("counts", counts.tolist(), "a histogram needs at least two classes")
        k_star = int(np.argmax(counts))
        deltas = counts[k_star] - np.delete(counts, k_star)
        return cls(tuple(int(d) for d in deltas), k_star)


def _holder_extra(x: float, tau: float, q: float, gamma_tau_sq: float) -> float:
    p = 1.0 / (1.0 - 1.0 / q)
    exponent = 2.0 * tau - 1.0 + 1.0 / q
    denom = (tau * 2.0 ** (4.0 * tau - 2.0 + 1.0 / q) * gamma_tau_sq
             * p ** (1.0 / p) * (q * (1.0 - tau) - 1.0) ** (1.0 / q))
    return x ** exponent / denom


def class_mistake_term(gamma: float, tau: float, delta: float, holder_q: Optional[float] = None) -> float:
    """
    Upper bound on P(n_k + Y_k >= n_(k*) + Y_(k*)) for one class at margin delta.
    :param holder_q: the Hoelder exponent q in (1/(1 - tau), inf); None picks q -> inf for tau > 1/2
                     and q = 1/(1 - 3 tau / 2) otherwise
    """
    x = gamma * delta
    if x == 0:
        return 0.5
    decay = math.exp(-x)
    if tau == 1.0:
        return decay * (0.5 + x / 4.0)
    gamma_tau_sq = float(special.gamma(tau)) ** 2
    if holder_q is not None:
        extra = _holder_extra(x, tau, holder_q, gamma_tau_sq)
    elif tau > 0.5:
        extra = x ** (2.0 * tau - 1.0) / (tau * 2.0 ** (4.0 * tau - 2.0) * gamma_tau_sq)
    else:
        extra = (x ** (tau / 2.0) / (tau * 2.0 ** (2.5 * tau - 1.0) * gamma_tau_sq)
                 * (1.5 * tau) ** (1.5 * tau) * (2.0 / tau - 3.0) ** (1.0 - 1.5 * tau))
    return decay * (0.5 + extra)


def mistake_bound(gamma: float, tau: float, mistake_input: MistakeInput, holder_q: Optional[float] = None) -> float:
    """
    Union bound on the probability that the noisy argmax differs from the true argmax. The value lies in
    [0, K - 1] and may exceed 1; callers needing a probability must clamp it.
    :raises DomainError: on gamma <= 0, tau outside (0, 1], or an inadmissible holder_q
    """
    _check_gamma(gamma)
    check_tau(tau)
    if holder_q is not None:
        if tau == 1.0:
            raise DomainError("holder_q", holder_q, "the Hoelder form needs tau < 1")
        if not holder_q > 1.0 / (1.0 - tau):
            raise DomainError("holder_q", holder_q, f"holder_q must exceed 1/(1 - tau) = {1.0 / (1.0 - tau):.6g}")
    return math.fsum(class_mistake_term(gamma, tau, d, holder_q) for d in mistake_input.deltas)
