from abc import ABC, abstractmethod
from typing import Callable, Hashable, Mapping, Union

from speed.src_py.errors import DomainError
from speed.src_py.genlap.streams import RandomStreams

Query = Hashable


def query_key(x: Query) -> Union[int, str]:
    """Maps a query to a stream key: non-negative ints are kept, anything else goes through str()."""
    if isinstance(x, int) and not isinstance(x, bool) and x >= 0:
        return x
    return str(x)


class TeacherOracle(ABC):
    """
    A teacher's private labelling model. Labels are deterministic given the oracle and the query, so
    a session can be replayed or run out of order.
    """

    def __init__(self, n_classes: int):
        if n_classes < 2:
            raise DomainError("k", n_classes, f"a teacher needs at least 2 classes, got {n_classes}")
        self.n_classes = int(n_classes)

    @abstractmethod
    def label(self, x: Query) -> int:
        """
        :param x: the query, any hashable
        :return: a class in [0, n_classes)
        """
        pass

    @staticmethod
    def get_type() -> str:
        """
        :return: the kind of oracle (e.g. "lookup", "uniform") as a string
        """
        return "ANY"

    def _check(self, label: int) -> int:
        if not (0 <= label < self.n_classes):
            raise DomainError("label", label, f"label {label} is outside [0, {self.n_classes})")
        return int(label)


class LookupTableOracle(TeacherOracle):
    """Answers from a fixed table, standing in for a model evaluated once on a dataset."""

    def __init__(self, n_classes: int, table: Mapping[Query, int]):
        super().__init__(n_classes)
        self.table = {x: self._check(y) for x, y in table.items()}

    def label(self, x: Query) -> int:
        try:
            return self.table[x]
        except KeyError:
            raise DomainError("x", x, f"query {x!r} is not in the lookup table") from None

    @staticmethod
    def get_type() -> str:
        return "lookup"


class FixedLabelOracle(TeacherOracle):
    def __init__(self, n_classes: int, fixed: int):
        super().__init__(n_classes)
        self.fixed = self._check(fixed)

    def label(self, x: Query) -> int:
        return self.fixed

    @staticmethod
    def get_type() -> str:
        return "fixed"


class UniformRandomOracle(TeacherOracle):
    """Votes uniformly at random, seeded per (seed, teacher, query)."""

    def __init__(self, n_classes: int, seed: int, teacher_id: int = 0):
        super().__init__(n_classes)
        self.streams = RandomStreams(seed).child("oracle", teacher_id)

    def label(self, x: Query) -> int:
        return int(self.streams.child(query_key(x)).generator().integers(self.n_classes))

    @staticmethod
    def get_type() -> str:
        return "uniform"


class MajorityWithErrorOracle(TeacherOracle):
    """
    Returns the true label except with probability error_rate, in which case it returns one of the
    other classes uniformly at random.
    """

    def __init__(self, n_classes: int, truth: Callable[[Query], int], error_rate: float, seed: int,
                 teacher_id: int = 0):
        super().__init__(n_classes)
        if not (0 <= error_rate <= 1):
            raise DomainError("error_rate", error_rate, f"error_rate must lie in [0, 1], got {error_rate!r}")
        self.truth = truth
        self.error_rate = float(error_rate)
        self.streams = RandomStreams(seed).child("oracle", teacher_id)

    def label(self, x: Query) -> int:
        true_label = self._check(self.truth(x))
        if self.error_rate == 0:
            return true_label
        rng = self.streams.child(query_key(x)).generator()
        if rng.random() >= self.error_rate:
            return true_label
        other = int(rng.integers(self.n_classes - 1))
        return other if other < true_label else other + 1

    @staticmethod
    def get_type() -> str:
        return "majority"
