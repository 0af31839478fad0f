"""
One labelling round: teachers vote on a query, the votes are noised and summed, the aggregator takes the
argmax in the clear or through the encrypted circuit, and the student records the label.
"""
import dataclasses
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, FrozenSet, List, Literal, Optional, Sequence, Tuple

import numpy as np

from speed.src_py.errors import ConfigError, DomainError, ShapeMismatchError
from speed.src_py.genlap.NoiseParams import NoiseParams
from speed.src_py.genlap.streams import RandomStreams
from speed.src_py.heargmax.ArgmaxCircuitConfig import ArgmaxCircuitConfig
from speed.src_py.heargmax.circuit import argmax_circuit, decrypt_onehot, encrypt_counts
from speed.src_py.heargmax.CipherBackend import CipherBackend
from speed.src_py.heargmax.CountingBackend import CountingBackend
from speed.src_py.heargmax.IdealBackend import IdealBackend
from speed.src_py.heargmax.NoisyBackend import NoisyBackend
from speed.src_py.protocol import logger
from speed.src_py.protocol.EncodedVote import aggregate, centralised_noise, encode_vote
from speed.src_py.protocol.TeacherOracle import Query, TeacherOracle
from speed.src_py.protocol.VoteHistogram import VoteHistogram

Mode = Literal["distributed", "centralised", "no-noise"]
HEMode = Literal["off", "ideal", "noisy"]
MODES = ("distributed", "centralised", "no-noise")
HE_MODES = ("off", "ideal", "noisy")


@dataclasses.dataclass(frozen=True)
class QueryOutcome:
    label: int
    counts: Tuple[int, ...]
    noise_max_abs: float
    circuit_path: str  # "clear" or the backend type
    bootstraps: int = 0
    degenerate: bool = False
    overflow: bool = False

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


def _backend(he: HEMode, circuit: ArgmaxCircuitConfig, streams: RandomStreams) -> CipherBackend:
    if he == "ideal":
        return IdealBackend()
    if circuit.sigma_c is None:
        raise ConfigError("sigma_c", None, "the noisy backend needs a calibrated sigma_c")
    return NoisyBackend(circuit.sigma_c, streams.child("backend").generator())


def run_query(teachers: Sequence[TeacherOracle], x: Query, mode: Mode, he: HEMode, streams: RandomStreams,
              params: Optional[NoiseParams] = None, circuit: ArgmaxCircuitConfig = ArgmaxCircuitConfig(),
              colluders: FrozenSet[int] = frozenset()) -> Tuple[int, QueryOutcome]:
    """
    Runs one query through the protocol.

    Teacher i draws its noise share from streams.child("teacher", i) and the aggregator its noise from
    streams.child("aggregator"), so an honest teacher's share does not depend on who else colludes.
    Colluding teachers send their one-hot vote without noise.
    :param params: gamma of the aggregated noise and n = len(teachers); unused in no-noise mode
    :return: the label and a trace of the round
    :raises ShapeMismatchError: if teachers disagree on the number of classes
    """
    if mode not in MODES:
        raise DomainError("mode", mode, f"unknown mode {mode!r}, expected one of {MODES}")
    if he not in HE_MODES:
        raise DomainError("he", he, f"unknown he backend {he!r}, expected one of {HE_MODES}")
    if not teachers:
        raise DomainError("teachers", 0, "a query needs at least one teacher")
    sizes = {t.n_classes for t in teachers}
    if len(sizes) != 1:
        raise ShapeMismatchError(f"Teachers disagree on the number of classes: {sorted(sizes)}")
    k = sizes.pop()
    n = len(teachers)
    if mode != "no-noise" and (params is None or params.n != n):
        raise DomainError("n", None if params is None else params.n, f"noise parameters must be given for n={n}")

    labels = [t.label(x) for t in teachers]
    counts = np.bincount(labels, minlength=k)
    if mode == "distributed":
        votes = [encode_vote(label, k, params, streams.child("teacher", i).generator(),
                             add_noise=i not in colluders, teacher_id=i)
                 for i, label in enumerate(labels)]
        values = aggregate(votes, k)
    elif mode == "centralised":
        values = centralised_noise(counts, params.gamma, streams.child("aggregator").generator())
    else:
        values = counts.astype(np.float64)

    noise_max_abs = float(np.max(np.abs(values - counts)))
    if he == "off":
        label = int(np.argmax(values))
        return label, QueryOutcome(label, tuple(int(c) for c in counts), noise_max_abs, "clear")

    backend = CountingBackend(_backend(he, circuit, streams))
    ciphers, overflow = encrypt_counts(values, backend, circuit, n)
    label, degenerate = decrypt_onehot(argmax_circuit(ciphers, backend, circuit), backend, circuit)
    return label, QueryOutcome(label, tuple(int(c) for c in counts), noise_max_abs, backend.get_type(),
                               backend.bootstraps, bool(degenerate), bool(np.any(overflow)))


@dataclasses.dataclass(frozen=True)
class SessionConfig:
    mode: Mode = "distributed"
    he: HEMode = "off"
    params: Optional[NoiseParams] = None
    circuit: ArgmaxCircuitConfig = ArgmaxCircuitConfig()
    colluders: FrozenSet[int] = frozenset()
    seed: int = 0
    workers: int = 1


@dataclasses.dataclass
class SessionResult:
    labels: List[int]
    votes: VoteHistogram
    outcomes: List[QueryOutcome]

    @property
    def accuracy(self) -> Optional[float]:
        """Share of labels matching the ground truth, when it is known."""
        if self.votes.true_labels is None or not self.labels:
            return None
        return float(np.mean(np.asarray(self.labels) == self.votes.true_labels))

    @property
    def bootstraps(self) -> int:
        return sum(o.bootstraps for o in self.outcomes)

    @property
    def degenerate_queries(self) -> List[int]:
        return [i for i, o in enumerate(self.outcomes) if o.degenerate]


def run_session(teachers: Sequence[TeacherOracle], queries: Sequence[Query], config: SessionConfig,
                true_labels: Optional[Sequence[int]] = None) -> SessionResult:
    """
    Labels every query. Query i runs on the stream child("query", i) of the session seed, so results do
    not depend on the number of workers, and are merged in query order.
    """
    if not teachers:
        raise DomainError("teachers", 0, "a session needs at least one teacher")
    if config.workers < 1:
        raise DomainError("workers", config.workers, f"workers must be positive, got {config.workers}")
    streams = RandomStreams(config.seed)

    def _run(indexed: Tuple[int, Query]) -> Tuple[int, QueryOutcome]:
        i, x = indexed
        return run_query(teachers, x, config.mode, config.he, streams.child("query", i), config.params,
                         config.circuit, config.colluders)

    logger.info(f"Running {len(queries)} queries over {len(teachers)} teachers",
                extra={"mode": config.mode, "he": config.he, "workers": config.workers})
    if config.workers == 1:
        results = [_run(item) for item in enumerate(queries)]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run, enumerate(queries)))

    labels = [label for label, _ in results]
    outcomes = [outcome for _, outcome in results]
    k = teachers[0].n_classes
    votes = VoteHistogram(len(teachers), k, np.array([o.counts for o in outcomes], dtype=np.int64).reshape(-1, k),
                          None if true_labels is None else np.asarray(true_labels))
    result = SessionResult(labels, votes, outcomes)
    if result.degenerate_queries:
        logger.warning(f"{len(result.degenerate_queries)} queries had degenerate circuit outputs",
                       extra={"queries": result.degenerate_queries})
    return result
