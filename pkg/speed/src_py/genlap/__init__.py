import logging

logger = logging.getLogger("GenLap")

from speed.src_py.genlap.NoiseParams import NoiseParams  # noqa: E402
from speed.src_py.genlap.quadrature import (  # noqa: E402
    QuadratureSettings, eval_I, eval_I0, tail_integral, tail_integral_iterated, head_integral, total_integral
)
from speed.src_py.genlap.GenLapDist import GenLapDist  # noqa: E402
from speed.src_py.genlap.sampling import sample_share, sample_aggregate  # noqa: E402
from speed.src_py.genlap.streams import RandomStreams  # noqa: E402
from speed.src_py.genlap.checks import DistributionCheck, distribution_check  # noqa: E402
