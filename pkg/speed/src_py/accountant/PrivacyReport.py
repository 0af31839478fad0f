import dataclasses
from typing import Any, Dict, List, Optional

from speed.src_py.accountant.MomentsLedger import Branch

REPORT_SCHEMA = "speed.privacy_report/1"


@dataclasses.dataclass(frozen=True)
class QueryTrace:
    index: int
    epsilon: float
    q_bound: float  # clamped to [0, 1)
    q_raw: float  # union bound before clamping, may exceed 1
    branch: Branch
    true_argmax: int


@dataclasses.dataclass
class PrivacyReport:
    """The overall (epsilon, delta) guarantee of a labelling session, with per-query traces."""
    epsilon: float
    delta: float
    lmax: int
    best_order: Optional[int] = None
    gamma: Optional[float] = None
    tau: Optional[float] = None
    tau_snapped: Optional[float] = None
    n: Optional[int] = None
    per_query: List[QueryTrace] = dataclasses.field(default_factory=list)
    alpha: List[float] = dataclasses.field(default_factory=list)

    @property
    def num_queries(self) -> int:
        return len(self.per_query)

    @property
    def disabled_queries(self) -> List[int]:
        """Indices of queries whose data-dependent moment bound was unavailable."""
        return [t.index for t in self.per_query if t.branch == "data-independent"]

    def to_dict(self, config: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "schema": REPORT_SCHEMA,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "lmax": self.lmax,
            "best_order": self.best_order,
            "gamma": self.gamma,
            "tau": self.tau,
            "tau_snapped": self.tau_snapped,
            "n": self.n,
            "num_queries": self.num_queries,
            "disabled_queries": self.disabled_queries,
            "alpha": list(self.alpha),
            "per_query": [dataclasses.asdict(t) for t in self.per_query],
        }
        if config is not None:
            out["config"] = config
        return out
