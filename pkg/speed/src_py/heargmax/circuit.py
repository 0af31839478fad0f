"""
The non-interactive argmax circuit: noisy counts are offset and rescaled into [0, 1/2), compared pairwise
by sign bootstraps, the comparison results accumulated per class and thresholded once more, so that the
decrypted output is the one-hot encoding of the argmax.
"""
import functools
from typing import List, Sequence, Tuple, Union

import numpy as np

from speed.src_py.errors import DomainError, ShapeMismatchError
from speed.src_py.heargmax import logger
from speed.src_py.heargmax.ArgmaxCircuitConfig import ArgmaxCircuitConfig
from speed.src_py.heargmax.CipherBackend import Cipher, CipherBackend


def rescale(value: Union[float, np.ndarray], config: ArgmaxCircuitConfig, n: int
            ) -> Tuple[Union[float, np.ndarray], Union[bool, np.ndarray]]:
    """
    Maps a noisy count to the torus as (value + offset) / b_i modulo 1.
    :param n: the number of teachers, fixing b_i when the config leaves it unset
    :return: (torus value, overflow flag); the flag is set where value < -offset or where the rescaled
             value leaves [0, 1/2), in which case comparisons against it are meaningless
    """
    b_i = config.input_modulus(n)
    shifted = np.asarray(value, dtype=np.float64) + config.offset
    overflow = (shifted < 0) | (shifted >= b_i / 2.0)
    torus = np.mod(shifted / b_i, 1.0)
    if np.any(overflow):
        # batches come from benchmarks, where the caller counts overflows
        log = logger.warning if torus.ndim <= 1 else logger.debug
        log(f"{int(np.count_nonzero(overflow))} value(s) outside the circuit's input range",
            extra={"offset": config.offset, "b_i": b_i})
    if torus.ndim == 0:
        return float(torus), bool(overflow)
    return torus, overflow


def encrypt_counts(counts: np.ndarray, backend: CipherBackend, config: ArgmaxCircuitConfig, n: int
                   ) -> Tuple[List[Cipher], np.ndarray]:
    """
    Encrypts noisy counts class by class.
    :param counts: shape (K,) for one query or (batch, K) for a batch of queries
    :return: K ciphertexts, each of batch shape counts.shape[:-1], and the overflow flags of counts' shape
    """
    counts = np.asarray(counts, dtype=np.float64)
    torus, overflow = rescale(counts, config, n)
    torus = np.asarray(torus)
    return [backend.encrypt(torus[..., k]) for k in range(counts.shape[-1])], np.asarray(overflow)


def compare(c_k: Cipher, c_k2: Cipher, backend: CipherBackend, config: ArgmaxCircuitConfig) -> Cipher:
    """
    theta = g_(0, 1/b_theta1, 0)(c_k - c_k2), an encryption of 1/b_theta1 iff c_k > c_k2 strictly.
    :raises BackendError: if the operands belong to another backend
    """
    return backend.bootstrap(backend.sub(c_k, c_k2), 0.0, 1.0 / config.b_theta1, 0.0, config.b_theta1)


def _compare_or_equal(c_k: Cipher, c_k2: Cipher, backend: CipherBackend, config: ArgmaxCircuitConfig) -> Cipher:
    # g_(0, 0, 1/b_theta1)(c_k2 - c_k) encrypts 1/b_theta1 iff c_k >= c_k2
    return backend.bootstrap(backend.sub(c_k2, c_k), 0.0, 0.0, 1.0 / config.b_theta1, config.b_theta1)


def argmax_circuit(ciphers: Sequence[Cipher], backend: CipherBackend, config: ArgmaxCircuitConfig) -> List[Cipher]:
    """
    Evaluates the argmax over K encrypted values.

    Class k beats every lower class strictly and every higher class on ties, so exactly one class wins
    all K - 1 comparisons and ties go to the lowest index. Theta_k, the sum of its comparison results,
    is then thresholded at (K - 3/2) / b_theta1. This issues K(K - 1) comparison bootstraps and
    K threshold bootstraps.
    :return: K ciphertexts decrypting to 1/b_theta2 at the argmax and 0 elsewhere
    :raises DomainError: if fewer than two ciphertexts are given
    """
    k = len(ciphers)
    if k < 2:
        raise DomainError("k", k, f"the argmax circuit needs at least 2 classes, got {k}")
    if k - 1 >= config.b_theta1 / 2:
        raise DomainError("b_theta1", config.b_theta1, f"b_theta1={config.b_theta1} is too small for {k} classes")
    shapes = {c.batch_shape for c in ciphers}
    if len(shapes) != 1:
        raise ShapeMismatchError(f"Ciphertexts have different batch shapes: {sorted(shapes)}")
    out = []
    for i in range(k):
        thetas = [_compare_or_equal(ciphers[i], ciphers[j], backend, config) if i < j
                  else compare(ciphers[i], ciphers[j], backend, config)
                  for j in range(k) if j != i]
        big_theta = functools.reduce(backend.add, thetas)
        out.append(backend.bootstrap(big_theta, (k - 1.5) / config.b_theta1, 1.0 / config.b_theta2, 0.0,
                                     config.b_theta2))
    return out


def decrypt_onehot(ciphers: Sequence[Cipher], backend: CipherBackend, config: ArgmaxCircuitConfig = ArgmaxCircuitConfig()
                   ) -> Tuple[Union[int, np.ndarray], Union[bool, np.ndarray]]:
    """
    Reads the argmax off the circuit output.
    :return: (class index, degenerate flag). A degenerate output has no or several nonzero coordinates;
             its index falls back to the lowest nonzero coordinate, or 0 if all are zero
    """
    decoded = np.stack([backend.decode(c, config.b_theta2) for c in ciphers], axis=-1)
    nonzero = decoded != 0
    index = np.where(nonzero.any(axis=-1), np.argmax(nonzero, axis=-1), 0)
    degenerate = nonzero.sum(axis=-1) != 1
    if index.ndim == 0:
        if degenerate:
            logger.warning(f"Degenerate one-hot output {decoded.tolist()}, falling back to class {int(index)}")
        return int(index), bool(degenerate)
    # batches come from benchmarks, where degenerate outputs are expected and counted by the caller
    logger.debug(f"{int(np.count_nonzero(degenerate))} degenerate one-hot output(s) in a batch of {index.size}")
    return index, degenerate
