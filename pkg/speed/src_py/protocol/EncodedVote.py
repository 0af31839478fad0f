import dataclasses
from typing import Optional, Sequence

import numpy as np

from speed.src_py.errors import DomainError, ShapeMismatchError
from speed.src_py.genlap.NoiseParams import NoiseParams
from speed.src_py.genlap.sampling import sample_share


@dataclasses.dataclass(frozen=True)
class EncodedVote:
    """A teacher's one-hot vote over K classes, each coordinate carrying that teacher's noise share."""
    coords: np.ndarray
    teacher_id: int = 0
    noised: bool = False

    @property
    def k(self) -> int:
        return int(self.coords.shape[0])


def encode_vote(label: int, k: int, params: NoiseParams, rng: np.random.Generator, add_noise: bool = True,
                teacher_id: int = 0) -> EncodedVote:
    """
    Encodes a vote as one-hot plus, per coordinate, an independent share G1 - G2 with
    G1, G2 ~ Gamma(1/n, 1/gamma).
    :raises DomainError: if label is outside [0, k)
    """
    if not (0 <= label < k):
        raise DomainError("label", label, f"label {label} is outside [0, {k})")
    coords = np.zeros(k)
    coords[label] = 1.0
    if add_noise:
        coords += sample_share(params.gamma, params.n, rng, k)
    return EncodedVote(coords, teacher_id, add_noise)


def aggregate(votes: Sequence[EncodedVote], k: Optional[int] = None) -> np.ndarray:
    """
    Sums votes coordinate by coordinate.
    :param k: the number of classes, only needed to size the zero vector of an empty sequence
    :raises ShapeMismatchError: if votes disagree on K
    """
    if not votes:
        return np.zeros(k or 0)
    sizes = {v.k for v in votes}
    if len(sizes) != 1 or (k is not None and sizes != {k}):
        raise ShapeMismatchError(f"Votes have different numbers of classes: {sorted(sizes)}")
    return np.sum([v.coords for v in votes], axis=0)


def centralised_noise(counts: np.ndarray, gamma: float, rng: np.random.Generator) -> np.ndarray:
    """The aggregator adds Laplace(0, 1/gamma) to each clear count."""
    if not gamma > 0:
        raise DomainError("gamma", gamma, f"gamma must be a positive real, got {gamma!r}")
    counts = np.asarray(counts, dtype=np.float64)
    return counts + rng.laplace(0.0, 1.0 / gamma, counts.shape)
