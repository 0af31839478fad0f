import dataclasses
import math
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from speed.src_py.errors import DomainError, ShapeMismatchError

DEFAULT_LMAX = 25
DEFAULT_DELTA = 1e-5

Branch = Literal["data-dependent", "data-independent"]


@dataclasses.dataclass(frozen=True)
class MomentsLedger:
    """Upper bounds alpha(l), l = 1..lmax, on the log moment generating function of the privacy loss."""
    alpha: np.ndarray

    def __post_init__(self):
        alpha = np.array(self.alpha, dtype=np.float64).reshape(-1)
        if alpha.size < 1:
            raise DomainError("lmax", alpha.size, "a ledger needs at least one moment order")
        if np.any(alpha < 0) or not np.all(np.isfinite(alpha)):
            raise DomainError("alpha", alpha.tolist(), "moments must be finite and non-negative")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)

    @property
    def lmax(self) -> int:
        return int(self.alpha.size)

    @property
    def orders(self) -> np.ndarray:
        return np.arange(1, self.lmax + 1, dtype=np.float64)

    @classmethod
    def zeros(cls, lmax: int = DEFAULT_LMAX) -> "MomentsLedger":
        return cls(np.zeros(lmax))

    def __add__(self, other: "MomentsLedger") -> "MomentsLedger":
        if self.lmax != other.lmax:
            raise ShapeMismatchError(f"Cannot compose ledgers with lmax {self.lmax} and {other.lmax}")
        return MomentsLedger(self.alpha + other.alpha)

    def __eq__(self, other) -> bool:
        return isinstance(other, MomentsLedger) and np.array_equal(self.alpha, other.alpha)

    def __hash__(self):
        return hash(self.alpha.tobytes())


def data_dependent_threshold(eps: float) -> float:
    """The largest mistake probability for which the data-dependent moment bound applies."""
    return math.expm1(eps) / math.expm1(2.0 * eps)


def moment_terms(eps: float, q: float, l: int) -> Tuple[float, Optional[float]]:
    """
    The data-independent bound min(eps l, eps^2 l (l + 1) / 2) and, when q is below the threshold,
    the data-dependent bound log((1 - q) ((1 - q) / (1 - e^eps q))^l + q e^(eps l)).
    :return: (data-independent bound, data-dependent bound or None)
    """
    if not (math.isfinite(eps) and eps > 0):
        raise DomainError("eps", eps, f"eps must be a positive real, got {eps!r}")
    if not (0 <= q < 1):
        raise DomainError("q", q, f"q must lie in [0, 1), got {q!r}")
    if int(l) != l or l < 1:
        raise DomainError("l", l, f"l must be a positive integer, got {l!r}")
    data_independent = min(eps * l, eps * eps * l * (l + 1) / 2.0)
    if q >= data_dependent_threshold(eps):
        return data_independent, None
    if q == 0:
        return data_independent, 0.0
    # in log space: (l + 1) log(1 - q) - l log(1 - e^eps q) combined with log(q) + eps l
    first = (l + 1) * math.log1p(-q) - l * math.log1p(-math.exp(eps) * q)
    second = math.log(q) + eps * l
    return data_independent, max(0.0, float(np.logaddexp(first, second)))


def moment_per_query(eps: float, q: float, l: int) -> float:
    """
    Bound on the l-th moment of one (eps, 0)-DP query whose outcome differs from a fixed class
    with probability at most q.
    """
    data_independent, data_dependent = moment_terms(eps, q, l)
    if data_dependent is None:
        return data_independent
    return min(data_independent, data_dependent)


def ledger_for_query(eps: float, q: float, lmax: int = DEFAULT_LMAX) -> Tuple[MomentsLedger, Branch]:
    """
    :return: the ledger of one query and the branch that was available to it
    """
    alpha = np.array([moment_per_query(eps, q, l) for l in range(1, lmax + 1)])
    branch: Branch = "data-dependent" if q < data_dependent_threshold(eps) else "data-independent"
    return MomentsLedger(alpha), branch


def compose(ledgers: Sequence[MomentsLedger], lmax: Optional[int] = None) -> MomentsLedger:
    """
    Composes adaptive mechanisms by summing their moments order by order.
    :param lmax: the ledger size to return for an empty sequence
    :raises ShapeMismatchError: if the ledgers disagree on lmax, or the sequence is empty without lmax
    """
    if not ledgers:
        if lmax is None:
            raise ShapeMismatchError("Composing an empty sequence of ledgers needs an explicit lmax")
        return MomentsLedger.zeros(lmax)
    sizes = {ledger.lmax for ledger in ledgers}
    if len(sizes) != 1 or (lmax is not None and sizes != {lmax}):
        raise ShapeMismatchError(f"Ledgers disagree on lmax: {sorted(sizes)}")
    return MomentsLedger(np.sum([ledger.alpha for ledger in ledgers], axis=0))


def tail_bound(ledger: MomentsLedger, delta: float = DEFAULT_DELTA) -> Tuple[float, int]:
    """
    :return: (epsilon, l) with epsilon = min over l of (alpha(l) + log(1/delta)) / l and l its minimiser
    """
    if not (0 < delta < 1):
        raise DomainError("delta", delta, f"delta must lie in (0, 1), got {delta!r}")
    candidates = (ledger.alpha + math.log(1.0 / delta)) / ledger.orders
    best = int(np.argmin(candidates))
    return float(candidates[best]), best + 1


def tail_epsilon(ledger: MomentsLedger, delta: float = DEFAULT_DELTA) -> float:
    """The epsilon at which the composed mechanism is (epsilon, delta)-differentially private."""
    return tail_bound(ledger, delta)[0]


def tail_delta(ledger: MomentsLedger, epsilon: float) -> float:
    """The delta reached at a given epsilon, min over l of exp(alpha(l) - l epsilon)."""
    return float(np.min(np.exp(ledger.alpha - ledger.orders * epsilon)))
