import logging

logger = logging.getLogger("Protocol")

from speed.src_py.protocol.TeacherOracle import (  # noqa: E402
    FixedLabelOracle, LookupTableOracle, MajorityWithErrorOracle, TeacherOracle, UniformRandomOracle
)
from speed.src_py.protocol.ensembles import Ensemble, build_ensemble, unanimous_histogram  # noqa: E402
from speed.src_py.protocol.VoteHistogram import VoteHistogram  # noqa: E402
from speed.src_py.protocol.EncodedVote import EncodedVote, aggregate, centralised_noise, encode_vote  # noqa: E402
from speed.src_py.protocol.CollusionSpec import CollusionSpec, threat_model  # noqa: E402
from speed.src_py.protocol.session import (  # noqa: E402
    QueryOutcome, SessionConfig, SessionResult, run_query, run_session
)
from speed.src_py.protocol.attack import AttackResult, AttackScenario, attack_demo  # noqa: E402
