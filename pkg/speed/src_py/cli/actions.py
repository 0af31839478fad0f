"""
The subcommands. Each takes a validated ExperimentConfig, writes its artifacts under config.out and returns
the main artifact as a dict. Every artifact carries a schema tag and the resolved configuration.
"""
import csv
import dataclasses
import math
from typing import Any, Dict, List, Optional

from speed.src_py.accountant import analyze, per_query_epsilon_refined
from speed.src_py.cli import logger
from speed.src_py.cli.ExperimentConfig import ExperimentConfig
from speed.src_py.cli.votes_io import load_votes, write_json, write_votes
from speed.src_py.genlap import GenLapDist, NoiseParams, RandomStreams, distribution_check
from speed.src_py.heargmax import calibrate_sigma, separated_benchmark, uniform_vote_benchmark
from speed.src_py.protocol import (
    CollusionSpec, SessionConfig, VoteHistogram, attack_demo, build_ensemble, run_session, threat_model,
    unanimous_histogram
)
from speed.src_py.protocol.attack import scenario_branches

SWEEP_SCHEMA = "speed.sweep/1"
SWEEP_COLUMNS = ("schema", "param", "value", "tau_snapped", "epsilon", "best_order", "epsilon_query",
                 "log_max_ratio")


def accounting_params(config: ExperimentConfig, n: int, tau: Optional[float] = None,
                      gamma: Optional[float] = None) -> NoiseParams:
    """Noise parameters from the configured viewpoint for n teachers."""
    tau = config.tau if tau is None else tau
    gamma = config.gamma if gamma is None else gamma
    honest = int(math.floor(tau * n + 0.5))
    spec = CollusionSpec.first(n, n - honest, config.published)
    return spec.params(gamma, config.viewpoint).snapped()


def _resolved_circuit(config: ExperimentConfig):
    circuit = config.circuit.resolved(config.teachers)
    if circuit.sigma_c is None:
        logger.info("Calibrating sigma_c on the uniform-vote benchmark")
        sigma_c = calibrate_sigma(config.target_accuracy, config.teachers, config.classes, config.calibration_trials,
                                  config.gamma, circuit, config.seed)
        circuit = dataclasses.replace(circuit, sigma_c=sigma_c)
    return circuit


def cmd_accountant(config: ExperimentConfig) -> Dict[str, Any]:
    votes = load_votes(config.votes, config.teachers, config.classes)
    report = analyze(votes, accounting_params(config, votes.n), config.delta, config.lmax)
    out = report.to_dict(config.to_dict())
    write_json(config.out / "privacy_report.json", out)
    logger.info(f"({report.epsilon:.4f}, {report.delta:g})-DP over {report.num_queries} queries")
    return out


def cmd_simulate(config: ExperimentConfig) -> Dict[str, Any]:
    n, k = config.teachers, config.classes
    ensemble = build_ensemble(config.ensemble, n, k, config.seed, config.error_rate)
    queries = list(range(config.queries))
    circuit = _resolved_circuit(config) if config.he == "noisy" else config.circuit.resolved(n)
    session = SessionConfig(mode=config.mode, he=config.he, params=NoiseParams(config.gamma, 1.0, n), circuit=circuit,
                            colluders=config.collusion().colluders, seed=config.seed, workers=config.workers)
    result = run_session(ensemble.teachers, queries, session, ensemble.true_labels(queries))

    resolved = dict(config.to_dict(), circuit=circuit.to_dict())
    write_votes(config.out / "votes.json", result.votes)
    labels = {
        "schema": "speed.labels/1",
        "labels": result.labels,
        "accuracy": result.accuracy,
        "bootstraps": result.bootstraps,
        "degenerate_queries": result.degenerate_queries,
        "per_query": [o.to_dict() for o in result.outcomes],
        "config": resolved,
    }
    write_json(config.out / "labels.json", labels)
    if config.mode == "no-noise":
        logger.warning("No noise was added, the session carries no privacy guarantee")
    else:
        report = analyze(result.votes, accounting_params(config, n), config.delta, config.lmax)
        write_json(config.out / "privacy_report.json", report.to_dict(resolved))
        labels["epsilon"] = report.epsilon
    if result.accuracy is not None:
        logger.info(f"Label accuracy {result.accuracy:.4f} over {len(queries)} queries")
    return labels


def _sweep_votes(config: ExperimentConfig) -> VoteHistogram:
    if config.votes is not None:
        return load_votes(config.votes, config.teachers, config.classes)
    return unanimous_histogram(config.teachers, config.classes, config.queries, config.seed)


def sweep_row(config: ExperimentConfig, votes: VoteHistogram, value: float) -> Dict[str, Any]:
    if config.sweep_param == "gamma":
        params = accounting_params(config, votes.n, gamma=value)
    else:
        params = accounting_params(config, votes.n, tau=value)
    report = analyze(votes, params, config.delta, config.lmax)
    _, max_ratio = GenLapDist(params).maximize_ratio()
    return {"schema": SWEEP_SCHEMA, "param": config.sweep_param, "value": value, "tau_snapped": params.tau,
            "epsilon": report.epsilon, "best_order": report.best_order,
            "epsilon_query": per_query_epsilon_refined(params.gamma, params.tau), "log_max_ratio": math.log(max_ratio)}


def cmd_sweep(config: ExperimentConfig) -> Dict[str, Any]:
    votes = _sweep_votes(config)
    rows: List[Dict[str, Any]] = []
    for value in config.sweep_values():
        rows.append(sweep_row(config, votes, value))
        logger.info(f"{config.sweep_param}={value:g}: epsilon={rows[-1]['epsilon']:.4f}")
    config.out.mkdir(parents=True, exist_ok=True)
    with open(config.out / "sweep.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    out = {"schema": SWEEP_SCHEMA, "param": config.sweep_param, "rows": rows, "config": config.to_dict()}
    write_json(config.out / "sweep.json", out)
    return out


def cmd_dist_check(config: ExperimentConfig) -> Dict[str, Any]:
    params = NoiseParams(config.gamma, config.tau, config.teachers)
    rng = RandomStreams(config.seed).child("dist-check").generator()
    check = distribution_check(params, config.samples, rng, config.reference_gamma, config.method)
    passed = check.passed(config.variance_tolerance, config.ks_threshold)
    out = dict(dataclasses.asdict(check), schema="speed.dist_check/1", variance_rel_error=check.variance_rel_error,
               passed=passed, verdict="PASS" if passed else "FAIL", config=config.to_dict())
    write_json(config.out / "dist_check.json", out)
    (logger.info if passed else logger.warning)(
        f"{out['verdict']}: variance {check.variance:.4g} (expected {check.expected_variance:.4g}), "
        f"KS {check.ks_statistic:.4g}")
    return out


def cmd_attack_demo(config: ExperimentConfig) -> Dict[str, Any]:
    scenario = config.attack
    streams = RandomStreams(config.seed).child("attack")
    # the aggregator sees every share except the colluders' as secret
    params = config.collusion().params(config.gamma, "outsider").snapped()
    known = attack_demo(scenario, "centralised-known", params, streams.child("centralised").generator(),
                        config.attack_trials)
    distributed = attack_demo(scenario, "distributed", params, streams.child("distributed").generator(),
                              config.attack_trials)
    out = {
        "schema": "speed.attack/1",
        "branches": scenario_branches(scenario),
        "centralised_known": known.to_dict(),
        "distributed": distributed.to_dict(),
        "threat_models": {f"{noise}/{model}": threat_model(noise, model)
                          for noise in ("centralised", "distributed") for model in ("private", "public")},
        "config": config.to_dict(),
    }
    write_json(config.out / "attack_demo.json", out)
    return out


def cmd_argmax_bench(config: ExperimentConfig) -> Dict[str, Any]:
    circuit = _resolved_circuit(config)
    n, k = config.teachers, config.classes
    # measured on a seed the calibration did not see
    uniform = uniform_vote_benchmark(circuit.sigma_c, n, k, config.bench_trials, config.gamma, circuit, config.seed + 1)
    gap = 6.0 * math.sqrt(2.0) * circuit.sigma_c * circuit.b_i
    separated = None
    if gap * (k - 1) < n + circuit.offset:
        separated = dataclasses.asdict(separated_benchmark(circuit.sigma_c, gap, n, k, config.bench_trials, circuit,
                                                           config.seed + 1))
    else:
        logger.warning(f"Gap {gap:.3g} is too wide for the input range, skipping the separated benchmark")
    out = {"schema": "speed.argmax_bench/1", "sigma_c": circuit.sigma_c, "sigma_c_counts": circuit.sigma_c * circuit.b_i,
           "uniform": dataclasses.asdict(uniform), "separated_gap": gap, "separated": separated,
           "bootstraps_per_query": k * k, "config": dict(config.to_dict(), circuit=circuit.to_dict())}
    write_json(config.out / "argmax_bench.json", out)
    logger.info(f"Uniform-vote accuracy {uniform.accuracy:.4f} at sigma_c={circuit.sigma_c:.4g}")
    return out


COMMANDS = {
    "accountant": cmd_accountant,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "dist-check": cmd_dist_check,
    "attack-demo": cmd_attack_demo,
    "argmax-bench": cmd_argmax_bench,
}
