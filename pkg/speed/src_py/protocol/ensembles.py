import dataclasses
from typing import Callable, List, Literal, Optional, Sequence

import numpy as np

from speed.src_py.errors import DomainError
from speed.src_py.genlap.streams import RandomStreams
from speed.src_py.protocol.TeacherOracle import (
    MajorityWithErrorOracle, Query, TeacherOracle, UniformRandomOracle, query_key
)
from speed.src_py.protocol.VoteHistogram import VoteHistogram

EnsembleKind = Literal["unanimous", "uniform", "majority"]
ENSEMBLE_KINDS = ("unanimous", "uniform", "majority")


@dataclasses.dataclass
class Ensemble:
    teachers: List[TeacherOracle]
    n_classes: int
    truth: Optional[Callable[[Query], int]] = None

    def true_labels(self, queries: Sequence[Query]) -> Optional[List[int]]:
        if self.truth is None:
            return None
        return [self.truth(x) for x in queries]


class SyntheticTruth:
    """A ground-truth labelling drawn uniformly per query from its own stream."""

    def __init__(self, n_classes: int, seed: int):
        self.n_classes = n_classes
        self.streams = RandomStreams(seed).child("truth")

    def __call__(self, x: Query) -> int:
        return int(self.streams.child(query_key(x)).generator().integers(self.n_classes))


def build_ensemble(kind: EnsembleKind, n: int, k: int, seed: int, error_rate: float = 0.1) -> Ensemble:
    """
    Builds a synthetic teacher ensemble.

    unanimous: every teacher returns the true label; uniform: every teacher votes at random and
    there is no ground truth; majority: every teacher errs independently with error_rate.
    """
    if n < 1:
        raise DomainError("teachers", n, f"an ensemble needs at least one teacher, got {n}")
    if kind == "uniform":
        return Ensemble([UniformRandomOracle(k, seed, i) for i in range(n)], k)
    if kind not in ("unanimous", "majority"):
        raise DomainError("ensemble", kind, f"unknown ensemble {kind!r}, expected one of {ENSEMBLE_KINDS}")
    truth = SyntheticTruth(k, seed)
    rate = 0.0 if kind == "unanimous" else error_rate
    return Ensemble([MajorityWithErrorOracle(k, truth, rate, seed, i) for i in range(n)], k, truth)


def unanimous_histogram(n: int, k: int, queries: int, seed: int) -> VoteHistogram:
    """The votes of a unanimous ensemble without running a session: all n teachers pick the true label."""
    truth = SyntheticTruth(k, seed)
    labels = np.array([truth(q) for q in range(queries)], dtype=np.int64)
    counts = np.zeros((queries, k), dtype=np.int64)
    counts[np.arange(queries), labels] = n
    return VoteHistogram(n, k, counts, labels)
