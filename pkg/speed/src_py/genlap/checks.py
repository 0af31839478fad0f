import dataclasses
from typing import Callable, Literal, Optional

import numpy as np
from scipy import stats

from speed.src_py.errors import DomainError
from speed.src_py.genlap import logger
from speed.src_py.genlap.GenLapDist import GenLapDist
from speed.src_py.genlap.NoiseParams import NoiseParams
from speed.src_py.genlap.sampling import sample_aggregate

# number of share draws generated at once by the "shares" method
_CHUNK_DRAWS = 2_500_000


@dataclasses.dataclass(frozen=True)
class DistributionCheck:
    samples: int
    mean: float
    variance: float
    expected_variance: float
    ks_statistic: float
    ks_pvalue: float

    @property
    def variance_rel_error(self) -> float:
        return abs(self.variance - self.expected_variance) / self.expected_variance

    def passed(self, variance_tolerance: float = 0.02, ks_threshold: float = 0.005) -> bool:
        return self.variance_rel_error < variance_tolerance and self.ks_statistic < ks_threshold


def draw_aggregates(params: NoiseParams, samples: int, rng: np.random.Generator,
                    method: Literal["collapsed", "shares"] = "shares") -> np.ndarray:
    """Draws aggregated noise in chunks, so the shares method stays within memory for large sample counts."""
    if method == "collapsed":
        return sample_aggregate(params, rng, samples, "collapsed")
    rows = max(1, _CHUNK_DRAWS // max(1, params.honest_shares))
    chunks = [sample_aggregate(params, rng, min(rows, samples - start), "shares")
              for start in range(0, samples, rows)]
    return np.concatenate(chunks)


def reference_cdf(params: NoiseParams, grid_points: int = 4001) -> Callable[[np.ndarray], np.ndarray]:
    """
    The CDF of the aggregated noise: Laplace(0, 1/gamma) at tau = 1, otherwise the generalized Laplace
    CDF tabulated on a grid and interpolated linearly.
    """
    if params.tau == 1.0:
        return stats.laplace(scale=params.scale).cdf
    dist = GenLapDist(params)
    # beyond 45 scales the tail is below 1e-18
    grid = np.linspace(0.0, 45.0 * params.scale, grid_points // 2 + 1)[1:]
    upper = np.array([dist.cdf(t) for t in grid])
    xs = np.concatenate([-grid[::-1], [0.0], grid])
    ys = np.concatenate([1.0 - upper[::-1], [0.5], upper])

    def cdf(x: np.ndarray) -> np.ndarray:
        return np.interp(x, xs, ys, left=0.0, right=1.0)

    return cdf


def distribution_check(params: NoiseParams, samples: int, rng: np.random.Generator,
                       reference_gamma: Optional[float] = None,
                       method: Literal["collapsed", "shares"] = "shares") -> DistributionCheck:
    """
    Compares aggregated noise shares against the distribution they should follow.
    :param params: the noise actually drawn; tau is snapped to whole shares
    :param reference_gamma: gamma of the reference distribution, params.gamma by default
    """
    if samples < 10_000:
        raise DomainError("samples", samples, f"samples must be at least 10000, got {samples}")
    params = params.snapped()
    reference = params.with_gamma(reference_gamma if reference_gamma is not None else params.gamma)
    draws = draw_aggregates(params, samples, rng, method)
    ks = stats.kstest(draws, reference_cdf(reference))
    result = DistributionCheck(samples=samples, mean=float(np.mean(draws)), variance=float(np.var(draws, ddof=1)),
                               expected_variance=2.0 * reference.tau / reference.gamma ** 2,
                               ks_statistic=float(ks.statistic), ks_pvalue=float(ks.pvalue))
    logger.debug(f"Checked {samples} aggregates: variance {result.variance:.4g}, KS {result.ks_statistic:.3g}",
                 extra={"n": params.n, "tau": params.tau, "gamma": params.gamma})
    return result

