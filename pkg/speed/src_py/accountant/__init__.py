import logging

logger = logging.getLogger("Accountant")

from speed.src_py.accountant.bounds import (  # noqa: E402
    MistakeInput, class_mistake_term, mistake_bound, per_query_epsilon, per_query_epsilon_refined, ratio_at_origin
)
from speed.src_py.accountant.MomentsLedger import (  # noqa: E402
    DEFAULT_DELTA, DEFAULT_LMAX, MomentsLedger, compose, data_dependent_threshold, ledger_for_query,
    moment_per_query, tail_bound, tail_delta, tail_epsilon
)
from speed.src_py.accountant.PrivacyReport import PrivacyReport, QueryTrace  # noqa: E402
from speed.src_py.accountant.analysis import analyze  # noqa: E402
