import dataclasses
from typing import FrozenSet, Literal

from speed.src_py.errors import DomainError
from speed.src_py.genlap.NoiseParams import NoiseParams

Viewpoint = Literal["outsider", "colluder", "honest"]
VIEWPOINTS = ("outsider", "colluder", "honest")

NoiseMode = Literal["centralised", "distributed"]
StudentModel = Literal["private", "public"]


@dataclasses.dataclass(frozen=True)
class CollusionSpec:
    """
    A set of colluding teachers. Colluders pool their noise, which for every viewpoint is the same as
    not noising at all, so the simulation has them send zero noise.

    tau per viewpoint, with S the honest teachers:
        outsider  |S| / n
        colluder  |S| / n
        honest    (n - 1) / n, or (|S| - 1) / n when colluders publish their noise to everyone
    """
    n: int
    colluders: FrozenSet[int] = frozenset()
    published: bool = False

    def __post_init__(self):
        colluders = frozenset(int(i) for i in self.colluders)
        if self.n < 1:
            raise DomainError("n", self.n, f"n must be a positive integer, got {self.n!r}")
        if any(not (0 <= i < self.n) for i in colluders):
            raise DomainError("colluders", sorted(colluders), f"teacher ids must lie in [0, {self.n})")
        object.__setattr__(self, "colluders", colluders)

    @classmethod
    def first(cls, n: int, count: int, published: bool = False) -> "CollusionSpec":
        """The first count teachers collude."""
        return cls(n, frozenset(range(count)), published)

    @property
    def honest_count(self) -> int:
        return self.n - len(self.colluders)

    def tau(self, viewpoint: Viewpoint) -> float:
        if viewpoint in ("outsider", "colluder"):
            return self.honest_count / self.n
        if viewpoint == "honest":
            return (self.honest_count - 1) / self.n if self.published else (self.n - 1) / self.n
        raise DomainError("viewpoint", viewpoint, f"unknown viewpoint {viewpoint!r}, expected one of {VIEWPOINTS}")

    def params(self, gamma: float, viewpoint: Viewpoint) -> NoiseParams:
        """:raises DomainError: if no noise stays secret from the viewpoint"""
        return NoiseParams(gamma, self.tau(viewpoint), self.n)


def threat_model(noise: NoiseMode, student_model: StudentModel) -> str:
    """
    The strongest aggregation server the setting protects against: "BHBC" (beyond honest-but-curious),
    "HBC" (honest-but-curious) or "H" (honest only).
    Centralised noise is safe against a curious server only if it cannot query the student model.
    """
    if noise == "distributed":
        return "BHBC"
    if noise == "centralised":
        if student_model == "private":
            return "HBC"
        if student_model == "public":
            return "H"
        raise DomainError("student_model", student_model, "student_model must be 'private' or 'public'")
    raise DomainError("noise", noise, "noise must be 'centralised' or 'distributed'")
