import numpy as np

from speed.src_py.errors import DomainError
from speed.src_py.heargmax.CipherBackend import Cipher, CipherBackend, TorusLike, centered


class NoisyBackend(CipherBackend):
    """
    Noise model of a torus LWE scheme.

    Every fresh ciphertext, whether from encrypt or a bootstrap, carries an independent N(0, sigma_c)
    perturbation of its phase. Homomorphic sums add these perturbations, so the difference of two
    fresh ciphertexts has standard deviation sqrt(2) sigma_c. Bootstraps decide on the perturbed phase
    and output values quantized to the given modulus.
    """

    def __init__(self, sigma_c: float, rng: np.random.Generator):
        super().__init__()
        if not (np.isfinite(sigma_c) and sigma_c >= 0):
            raise DomainError("sigma_c", sigma_c, f"sigma_c must be a non-negative real, got {sigma_c!r}")
        self.sigma_c = float(sigma_c)
        self.rng = rng

    @property
    def sigma_eff(self) -> float:
        """The standard deviation of the difference of two fresh ciphertexts."""
        return float(np.sqrt(2.0) * self.sigma_c)

    def _noise(self, shape) -> np.ndarray:
        return self.rng.normal(0.0, self.sigma_c, shape) if self.sigma_c > 0 else np.zeros(shape)

    def encrypt(self, value: TorusLike) -> Cipher:
        value = np.asarray(value, dtype=np.float64)
        return self._wrap(value + self._noise(value.shape))

    def bootstrap(self, cipher: Cipher, threshold: float, high: float, low: float, modulus: int) -> Cipher:
        self._own(cipher)
        out = np.where(centered(cipher.phase) > threshold, high, low)
        out = np.rint(out * modulus) / modulus
        return self._wrap(out + self._noise(out.shape))

    @staticmethod
    def get_type() -> str:
        return "noisy"
