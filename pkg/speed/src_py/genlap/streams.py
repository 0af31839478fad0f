import zlib
from typing import Tuple, Union

import numpy as np

Key = Union[int, str]


def _key_to_int(key: Key) -> int:
    if isinstance(key, str):
        return zlib.crc32(key.encode("utf-8"))
    if key < 0:
        raise ValueError(f"Stream keys must be non-negative, got {key}")
    return int(key)


class RandomStreams:
    """
    A tree of reproducible random streams rooted at one seed.

    child("query", 3).child("teacher", 17) always yields the same generator for the same seed, whatever
    else was drawn before, so queries and teachers can be run in any order or concurrently.
    A generator obtained from generator() must stay with one task.
    """

    def __init__(self, seed: int, path: Tuple[int, ...] = ()):
        self.seed = int(seed)
        self.path = path

    def child(self, *keys: Key) -> "RandomStreams":
        return RandomStreams(self.seed, self.path + tuple(_key_to_int(k) for k in keys))

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def __repr__(self) -> str:
        return f"RandomStreams(seed={self.seed}, path={self.path})"
