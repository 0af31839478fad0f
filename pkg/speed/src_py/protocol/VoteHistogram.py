import dataclasses
from typing import Any, Dict, Optional, Sequence

import numpy as np

from speed.src_py.errors import ShapeMismatchError, VotesFormatError

VOTES_SCHEMA = "speed.votes/1"


@dataclasses.dataclass
class VoteHistogram:
    """
    Clear vote counts of a session: counts[q, k] teachers voted class k on query q.
    true_labels, when known, holds the ground-truth class of every query.
    """
    n: int
    k: int
    counts: np.ndarray
    true_labels: Optional[np.ndarray] = None

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.size == 0:
            self.counts = self.counts.reshape(0, self.k)
        if self.n < 1 or self.k < 2:
            raise ShapeMismatchError(f"A histogram needs n >= 1 and k >= 2, got n={self.n}, k={self.k}")
        if self.counts.ndim != 2 or self.counts.shape[1] != self.k:
            raise ShapeMismatchError(f"Counts of shape {self.counts.shape} do not have {self.k} columns")
        for row, counts in enumerate(self.counts):
            if np.any(counts < 0):
                raise VotesFormatError(f"negative vote count in {counts.tolist()}", row=row)
            if counts.sum() > self.n:
                raise VotesFormatError(f"{int(counts.sum())} votes exceed n={self.n} teachers", row=row)
        if self.true_labels is not None:
            self.true_labels = np.asarray(self.true_labels, dtype=np.int64)
            if self.true_labels.shape != (self.num_queries,):
                raise ShapeMismatchError(f"{self.true_labels.size} true labels for {self.num_queries} queries")
            if np.any((self.true_labels < 0) | (self.true_labels >= self.k)):
                raise VotesFormatError(f"true labels must lie in [0, {self.k})")

    @property
    def num_queries(self) -> int:
        return int(self.counts.shape[0])

    def clear_argmax(self) -> np.ndarray:
        """The plurality label per query, ties going to the lowest class index."""
        return np.argmax(self.counts, axis=1)

    @classmethod
    def from_labels(cls, n: int, k: int, labels: Sequence[Sequence[int]],
                    true_labels: Optional[Sequence[int]] = None) -> "VoteHistogram":
        """:param labels: one sequence of teacher votes per query"""
        counts = np.array([np.bincount(np.asarray(row, dtype=np.int64), minlength=k) for row in labels],
                          dtype=np.int64).reshape(-1, k)
        return cls(n, k, counts, None if true_labels is None else np.asarray(true_labels))

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"schema": VOTES_SCHEMA, "n": self.n, "k": self.k, "queries": self.counts.tolist()}
        if self.true_labels is not None:
            out["true_labels"] = self.true_labels.tolist()
        return out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VoteHistogram":
        """
        :raises VotesFormatError: naming the offending row when the structure is malformed
        """
        if not isinstance(data, dict):
            raise VotesFormatError("votes must be a JSON object")
        for key in ("n", "k", "queries"):
            if key not in data:
                raise VotesFormatError(f"missing key {key!r}")
        n, k, queries = data["n"], data["k"], data["queries"]
        if not (isinstance(n, int) and isinstance(k, int)) or isinstance(n, bool) or isinstance(k, bool):
            raise VotesFormatError("n and k must be integers")
        if not isinstance(queries, list):
            raise VotesFormatError("queries must be a list of rows")
        for row, counts in enumerate(queries):
            if not isinstance(counts, list) or len(counts) != k:
                raise VotesFormatError(f"expected {k} counts, got {counts!r}", row=row)
            if not all(isinstance(c, int) and not isinstance(c, bool) for c in counts):
                raise VotesFormatError(f"counts must be integers, got {counts!r}", row=row)
        try:
            return cls(n, k, np.array(queries, dtype=np.int64).reshape(-1, k), data.get("true_labels"))
        except (ShapeMismatchError, TypeError, ValueError) as e:
            raise VotesFormatError(str(e)) from e
