import logging

logger = logging.getLogger("HEArgmax")

from speed.src_py.heargmax.CipherBackend import Cipher, CipherBackend  # noqa: E402
from speed.src_py.heargmax.IdealBackend import IdealBackend  # noqa: E402
from speed.src_py.heargmax.NoisyBackend import NoisyBackend  # noqa: E402
from speed.src_py.heargmax.CountingBackend import CountingBackend  # noqa: E402
from speed.src_py.heargmax.ArgmaxCircuitConfig import ArgmaxCircuitConfig, minimum_offset  # noqa: E402
from speed.src_py.heargmax.circuit import (  # noqa: E402
    argmax_circuit, compare, decrypt_onehot, encrypt_counts, rescale
)
from speed.src_py.heargmax.benchmark import (  # noqa: E402
    BenchmarkResult, calibrate_sigma, separated_benchmark, uniform_vote_benchmark
)
