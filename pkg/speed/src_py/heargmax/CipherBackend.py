import dataclasses
import itertools
from abc import ABC, abstractmethod
from typing import Tuple, Union

import numpy as np

from speed.src_py.errors import BackendError

TorusLike = Union[float, np.ndarray]

_backend_ids = itertools.count(1)


@dataclasses.dataclass(frozen=True)
class Cipher:
    """
    An encrypted torus value, or a batch of them.

    The phase is what decryption would yield before rounding. A batch holds one phase per query, so a
    single circuit evaluation covers many independent queries.
    """
    phase: np.ndarray
    backend_id: int

    @property
    def batch_shape(self) -> Tuple[int, ...]:
        return self.phase.shape


def centered(phase: np.ndarray) -> np.ndarray:
    """Maps torus values to their representative in [-1/2, 1/2]."""
    return phase - np.round(phase)


class CipherBackend(ABC):
    """
    The encrypted-scalar operations the argmax circuit is built from.

    Linear operations act on phases modulo 1 and are shared by all backends. A backend decides how
    encryption perturbs a phase and how a bootstrap evaluates the step function
    g_(t,a,b)(x) = a if x > t else b on the centered phase.
    """

    def __init__(self):
        self.backend_id = next(_backend_ids)

    @abstractmethod
    def encrypt(self, value: TorusLike) -> Cipher:
        """
        :param value: torus value(s), reduced modulo 1
        :return: a fresh ciphertext of this backend
        """
        pass

    @abstractmethod
    def bootstrap(self, cipher: Cipher, threshold: float, high: float, low: float, modulus: int) -> Cipher:
        """
        Refreshes a ciphertext while applying g_(threshold,high,low) to its centered phase.
        :param modulus: the plaintext modulus high and low are multiples of 1/modulus in
        :return: a fresh ciphertext of high where the phase exceeds threshold, low elsewhere
        """
        pass

    @staticmethod
    def get_type() -> str:
        """
        :return: the kind of backend (e.g. "ideal", "noisy") as a string
        """
        return "ANY"

    def _own(self, *ciphers: Cipher):
        for c in ciphers:
            if c.backend_id != self.backend_id:
                raise BackendError(f"Ciphertext of backend {c.backend_id} used with backend {self.backend_id}")

    def _wrap(self, phase: TorusLike) -> Cipher:
        return Cipher(np.mod(np.asarray(phase, dtype=np.float64), 1.0), self.backend_id)

    def add(self, left: Cipher, right: Cipher) -> Cipher:
        self._own(left, right)
        return self._wrap(left.phase + right.phase)

    def sub(self, left: Cipher, right: Cipher) -> Cipher:
        self._own(left, right)
        return self._wrap(left.phase - right.phase)

    def add_plain(self, cipher: Cipher, value: TorusLike) -> Cipher:
        self._own(cipher)
        return self._wrap(cipher.phase + np.asarray(value, dtype=np.float64))

    def decrypt(self, cipher: Cipher) -> np.ndarray:
        """:return: the phase in [0, 1)"""
        self._own(cipher)
        return cipher.phase.copy()

    def decode(self, cipher: Cipher, modulus: int) -> np.ndarray:
        """:return: the decrypted value rounded to the nearest multiple of 1/modulus, as an integer in [0, modulus)"""
        return np.mod(np.rint(self.decrypt(cipher) * modulus), modulus).astype(np.int64)
