import math
from typing import TYPE_CHECKING, Dict, List, Tuple

from speed.src_py.accountant import logger
from speed.src_py.accountant.bounds import MistakeInput, mistake_bound, per_query_epsilon_refined
from speed.src_py.accountant.MomentsLedger import (
    DEFAULT_DELTA, DEFAULT_LMAX, Branch, MomentsLedger, compose, ledger_for_query, tail_bound
)
from speed.src_py.accountant.PrivacyReport import PrivacyReport, QueryTrace
from speed.src_py.errors import DomainError
from speed.src_py.genlap.NoiseParams import NoiseParams

if TYPE_CHECKING:
    from speed.src_py.protocol.VoteHistogram import VoteHistogram

# the largest float below 1, used to clamp union bounds into a probability
_Q_CEILING = math.nextafter(1.0, 0.0)


def analyze(votes: "VoteHistogram", params: NoiseParams, delta: float = DEFAULT_DELTA,
            lmax: int = DEFAULT_LMAX) -> PrivacyReport:
    """
    Determines the overall (epsilon, delta) guarantee of a labelling session.

    Every query is charged the refined per-query cost at the snapped tau, bounded in moments with the
    mistake probability derived from its clear histogram, then all ledgers are composed and turned into
    epsilon by the tail bound.
    :param votes: the clear vote histogram of the session
    :param params: gamma, tau and n; params.n must match votes.n
    :raises DomainError: on parameter domain violations or when params.n differs from votes.n
    """
    if not (0 < delta < 1):
        raise DomainError("delta", delta, f"delta must lie in (0, 1), got {delta!r}")
    if isinstance(lmax, bool) or int(lmax) != lmax or lmax < 1:
        raise DomainError("lmax", lmax, f"lmax must be a positive integer, got {lmax!r}")
    if params.n != votes.n:
        raise DomainError("n", params.n, f"noise parameters are for n={params.n} teachers, votes for n={votes.n}")
    snapped = params.snapped()
    if snapped.tau != params.tau:
        logger.info(f"Snapped tau={params.tau} to {snapped.tau} ({snapped.honest_shares}/{snapped.n} shares)")

    report = PrivacyReport(epsilon=0.0, delta=delta, lmax=int(lmax), gamma=params.gamma, tau=params.tau,
                           tau_snapped=snapped.tau, n=params.n)
    if votes.num_queries == 0:
        report.alpha = [0.0] * int(lmax)
        return report

    eps = per_query_epsilon_refined(snapped.gamma, snapped.tau)
    # unanimous sessions repeat the same margins, so ledgers are shared per distinct margin tuple
    cache: Dict[Tuple[int, ...], Tuple[float, MomentsLedger, Branch]] = {}
    ledgers: List[MomentsLedger] = []
    for index, counts in enumerate(votes.counts):
        mistake_input = MistakeInput.from_counts(counts)
        if mistake_input.deltas not in cache:
            q_raw = mistake_bound(snapped.gamma, snapped.tau, mistake_input)
            ledger, branch = ledger_for_query(eps, min(q_raw, _Q_CEILING), int(lmax))
            cache[mistake_input.deltas] = (q_raw, ledger, branch)
        q_raw, ledger, branch = cache[mistake_input.deltas]
        if branch == "data-independent":
            logger.warning(f"Query {index}: mistake bound {q_raw:.4g} disables the data-dependent moment bound",
                           extra={"query": index, "q": q_raw, "epsilon": eps})
        ledgers.append(ledger)
        report.per_query.append(QueryTrace(index=index, epsilon=eps, q_bound=min(q_raw, _Q_CEILING), q_raw=q_raw,
                                           branch=branch, true_argmax=int(mistake_input.true_argmax)))

    total = compose(ledgers, int(lmax))
    report.epsilon, report.best_order = tail_bound(total, delta)
    report.alpha = total.alpha.tolist()
    logger.debug(f"Composed {votes.num_queries} queries: epsilon={report.epsilon:.6g} at l={report.best_order}",
                 extra={"epsilon": report.epsilon, "l": report.best_order, "queries": votes.num_queries})
    return report
