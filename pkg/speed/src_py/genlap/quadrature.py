"""
Quadrature for the kernel I_tau(v) = int_0^inf (t+v)^(tau-1) t^(tau-1) e^(-2t) dt and the integrals of
e^(-v) I_tau(v) that drive the generalized Laplace CDF and the per-query privacy cost.

Near t = 0 the integrands carry t^(tau-1). On [0, 1] they are integrated after the substitution
u = t^tau, which turns t^(tau-1) dt into du / tau. On [1, inf) every integrand here is bounded by
its value at t = 1 times e^(-2(t-1)), so integration stops where that envelope drops below
TRUNCATION.
"""
import dataclasses
import math
from typing import Callable, Literal, Optional, Sequence

from scipy import integrate, special

from speed.src_py.errors import DomainError, QuadratureError
from speed.src_py.genlap import logger

TRUNCATION = 1e-18

# t beyond which e^(-2(t-1)) < TRUNCATION
_KERNEL_CUTOFF = 1.0 + math.log(1.0 / TRUNCATION) / 2.0

# width beyond which e^(-w) < TRUNCATION
_TAIL_WIDTH = math.log(1.0 / TRUNCATION)


@dataclasses.dataclass(frozen=True)
class QuadratureSettings:
    rel_tol: float = 1e-10
    # "substitution" removes the t^(tau-1) singularity exactly; "direct" leaves it to the integrator
    singularity: Literal["substitution", "direct"] = "substitution"
    limit: int = 500
    # an unconverged result is still accepted when its error estimate is within this factor of rel_tol
    slack: float = 100.0

    def __post_init__(self):
        if not (0 < self.rel_tol < 1):
            raise DomainError("rel_tol", self.rel_tol)
        if self.singularity not in ("substitution", "direct"):
            raise DomainError("singularity", self.singularity)


DEFAULT_SETTINGS = QuadratureSettings()


def _quad(func: Callable[[float], float], lower: float, upper: float, settings: QuadratureSettings,
          name: str, points: Optional[Sequence[float]] = None) -> float:
    out = integrate.quad(func, lower, upper, epsabs=0.0, epsrel=settings.rel_tol, limit=settings.limit,
                         points=points, full_output=1)
    value, abs_error = out[0], out[1]
    if len(out) > 3:
        # the integrator flagged a problem; keep the value only if its error estimate is acceptable
        if not math.isfinite(value) or abs_error > settings.slack * settings.rel_tol * abs(value):
            raise QuadratureError(name, abs_error, f"Quadrature for {name} failed: {out[3]}")
        logger.debug(f"Accepted {name} on [{lower}, {upper}] despite integrator warning",
                     extra={"abs_error": abs_error, "value": value})
    return value


def check_tau(tau: float, upper_open: bool = False):
    if upper_open and not (0 < tau < 1):
        raise DomainError("tau", tau, f"tau must lie in (0, 1), got {tau!r}")
    if not (0 < tau <= 1):
        raise DomainError("tau", tau, f"tau must lie in (0, 1], got {tau!r}")


def _singular_integral(tau: float, smooth: Callable[[float], float], settings: QuadratureSettings,
                       name: str, kink: Optional[float] = None) -> float:
    """
    Integrates t^(tau-1) * smooth(t) over [0, inf) for a smooth factor decaying at least like e^(-2t).
    :param kink: a point in t where smooth varies sharply, used as a breakpoint on [0, 1]
    """
    if settings.singularity == "substitution":
        inv_tau = 1.0 / tau

        def head(u: float) -> float:
            return smooth(u ** inv_tau)

        points = [kink ** tau] if kink is not None and 0 < kink < 1 else None
        lower = _quad(head, 0.0, 1.0, settings, name, points) / tau
    else:
        def head_direct(t: float) -> float:
            return t ** (tau - 1.0) * smooth(t)

        points = [kink] if kink is not None and 0 < kink < 1 else None
        lower = _quad(head_direct, 0.0, 1.0, settings, name, points)

    def rest(t: float) -> float:
        return t ** (tau - 1.0) * smooth(t)

    return lower + _quad(rest, 1.0, _KERNEL_CUTOFF, settings, name)


def eval_I0(tau: float) -> float:
    """
    I_tau(0) in closed form, Gamma(2 tau - 1) / 2^(2 tau - 1).
    :raises DomainError: if tau <= 1/2, where the integral diverges
    """
    check_tau(tau)
    if tau <= 0.5:
        raise DomainError("tau", tau, f"I_tau(0) diverges for tau <= 1/2, got tau={tau!r}")
    return float(special.gamma(2.0 * tau - 1.0) / 2.0 ** (2.0 * tau - 1.0))


def eval_I(tau: float, v: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """
    Evaluates I_tau(v) = int_0^inf (t+v)^(tau-1) t^(tau-1) e^(-2t) dt.
    :param tau: the share ratio in (0, 1]
    :param v: a non-negative real; 0 is only allowed for tau > 1/2
    :return: I_tau(v) within settings.rel_tol
    :raises DomainError: if tau is outside (0, 1], v < 0, or v = 0 with tau <= 1/2
    """
    check_tau(tau)
    if not v >= 0:
        raise DomainError("v", v, f"v must be non-negative, got {v!r}")
    if tau == 1.0:
        return 0.5
    if v == 0:
        return eval_I0(tau)

    exponent = tau - 1.0

    def smooth(t: float) -> float:
        return (t + v) ** exponent * math.exp(-2.0 * t)

    return _singular_integral(tau, smooth, settings, "I_tau", kink=v)


def tail_integral(tau: float, a: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """
    int_a^inf e^(-v) I_tau(v) dv through the order-swapped form
    int_0^inf t^(tau-1) e^(-t) Gamma(tau, t + a) dt, with Gamma(., .) the upper incomplete gamma function.
    :raises DomainError: if a < 0
    :raises QuadratureError: if the integral does not converge
    """
    check_tau(tau)
    if not a >= 0:
        raise DomainError("a", a, f"a must be non-negative, got {a!r}")
    if tau == 1.0:
        return math.exp(-a) / 2.0

    gamma_tau = float(special.gamma(tau))

    def smooth(t: float) -> float:
        return math.exp(-t) * float(special.gammaincc(tau, t + a)) * gamma_tau

    return _singular_integral(tau, smooth, settings, "tail_integral")


def tail_integral_iterated(tau: float, a: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """
    int_a^inf e^(-v) I_tau(v) dv as an iterated integral over eval_I. Much slower than tail_integral and
    kept as an independent check of it.
    """
    check_tau(tau)
    if not a >= 0:
        raise DomainError("a", a, f"a must be non-negative, got {a!r}")
    if tau == 1.0:
        return math.exp(-a) / 2.0

    def outer(v: float) -> float:
        return math.exp(-v) * eval_I(tau, v, settings)

    # I is decreasing, so e^(-v) I(v) falls at least like e^(-(v-a))
    near = _quad(outer, a, a + 1.0, settings, "tail_integral_iterated")
    far = _quad(outer, a + 1.0, a + _TAIL_WIDTH, settings, "tail_integral_iterated")
    return near + far


def head_integral(tau: float, b: float, settings: QuadratureSettings = DEFAULT_SETTINGS) -> float:
    """
    int_0^b e^(-v) I_tau(v) dv, integrated directly so that small b does not cancel against the tail.
    """
    check_tau(tau)
    if not b >= 0:
        raise DomainError("b", b, f"b must be non-negative, got {b!r}")
    if b == 0:
        return 0.0
    if tau == 1.0:
        return -math.expm1(-b) / 2.0

    def outer(v: float) -> float:
        return math.exp(-v) * eval_I(tau, v, settings)

    return _quad(outer, 0.0, b, settings, "head_integral")


def total_integral(tau: float) -> float:
    """int_0^inf e^(-v) I_tau(v) dv = Gamma(tau)^2 / 2."""
    check_tau(tau)
    return float(special.gamma(tau)) ** 2 / 2.0
