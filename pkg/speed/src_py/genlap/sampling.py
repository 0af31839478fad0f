from typing import Literal, Optional, Tuple, Union

import numpy as np

from speed.src_py.errors import DomainError
from speed.src_py.genlap.NoiseParams import NoiseParams

Size = Optional[Union[int, Tuple[int, ...]]]


def sample_share(gamma: float, n: int, rng: np.random.Generator, size: Size = None) -> Union[float, np.ndarray]:
    """
    Draws the noise share of one teacher, G1 - G2 with G1, G2 i.i.d. Gamma(shape 1/n, scale 1/gamma).
    n such shares sum to Laplace(0, 1/gamma).
    :param gamma: inverse noise scale
    :param n: the number of teachers splitting the noise
    :param rng: the caller's generator
    :param size: output shape, a scalar when None
    """
    if not gamma > 0:
        raise DomainError("gamma", gamma)
    if n < 1:
        raise DomainError("n", n, f"n must be at least 1, got {n!r}")
    shape, scale = 1.0 / n, 1.0 / gamma
    return rng.gamma(shape, scale, size) - rng.gamma(shape, scale, size)


def sample_aggregate(params: NoiseParams, rng: np.random.Generator, size: Size = None,
                     method: Literal["collapsed", "shares"] = "collapsed") -> Union[float, np.ndarray]:
    """
    Draws the sum of round(tau * n) independent noise shares.

    "shares" sums the shares one by one. "collapsed" uses that a sum of m Gamma(1/n) variables is
    Gamma(m/n), which gives the same distribution at the cost of two Gamma draws.
    :raises DomainError: if tau * n rounds to zero shares
    """
    m = params.honest_shares
    if m == 0:
        raise DomainError("tau", params.tau, f"tau={params.tau} leaves no noise share among n={params.n} teachers")
    if method == "collapsed":
        shape, scale = m / params.n, params.scale
        return rng.gamma(shape, scale, size) - rng.gamma(shape, scale, size)
    if method == "shares":
        out_shape = () if size is None else ((size,) if isinstance(size, int) else tuple(size))
        shares = sample_share(params.gamma, params.n, rng, (m,) + out_shape)
        total = shares.sum(axis=0)
        return float(total) if size is None else total
    raise DomainError("method", method)
