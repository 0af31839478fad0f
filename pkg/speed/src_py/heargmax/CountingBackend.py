from speed.src_py.heargmax.CipherBackend import Cipher, CipherBackend, TorusLike


class CountingBackend(CipherBackend):
    """
    Wraps another backend and counts the bootstrap operations issued through it.
    A batched ciphertext counts once per bootstrap call, whatever its batch size.
    Not meant to be shared between tasks.
    """

    def __init__(self, inner: CipherBackend):
        super().__init__()
        self.inner = inner
        self.backend_id = inner.backend_id
        self.bootstraps = 0
        self.encryptions = 0

    def encrypt(self, value: TorusLike) -> Cipher:
        self.encryptions += 1
        return self.inner.encrypt(value)

    def bootstrap(self, cipher: Cipher, threshold: float, high: float, low: float, modulus: int) -> Cipher:
        self.bootstraps += 1
        return self.inner.bootstrap(cipher, threshold, high, low, modulus)

    def get_type(self) -> str:
        return self.inner.get_type()
