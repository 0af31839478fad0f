import numpy as np

from speed.src_py.heargmax.CipherBackend import Cipher, CipherBackend, TorusLike, centered


class IdealBackend(CipherBackend):
    """Exact backend: decryption returns the encrypted value and bootstraps are exact step functions."""

    def encrypt(self, value: TorusLike) -> Cipher:
        return self._wrap(value)

    def bootstrap(self, cipher: Cipher, threshold: float, high: float, low: float, modulus: int) -> Cipher:
        self._own(cipher)
        return self._wrap(np.where(centered(cipher.phase) > threshold, high, low))

    @staticmethod
    def get_type() -> str:
        return "ideal"
