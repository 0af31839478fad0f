import argparse
from pathlib import Path
from importlib.metadata import version, PackageNotFoundError

app_name: str = str(__package__).capitalize()

# The root directory of the pip project (speed)
speed_dir: Path = Path(__file__).parent

res_dir: Path = speed_dir / "res"

log_dir: Path = speed_dir / "logs"

__version__ = "Unknown"
try:
    __version__ = version("speed-pate")
except PackageNotFoundError as _:
    pass


def get_parser() -> argparse.ArgumentParser:
    def _add_to_parsers(_subparsers, _arg_names, _d):
        if isinstance(_arg_names, str):
            _arg_names = [_arg_names]
        for _s in _subparsers:
            _s.add_argument(*_arg_names, **_d)

    # Base parser for common arguments
    base_parser = argparse.ArgumentParser(add_help=False)
    verbose_arg = {"action": "store_true", "help": "Enable verbose logging."}
    quiet_arg = {"action": "store_true", "help": "Disable logging."}
    _add_to_parsers([base_parser], ("-v", "--verbose"), verbose_arg)
    _add_to_parsers([base_parser], ("-q", "--quiet"), quiet_arg)

    # Main parser
    parser = argparse.ArgumentParser(prog="speed",
                                     description=f"Speed - private collaborative labelling with distributed noise "
                                                 f"and an encrypted argmax. Version: {__version__}",
                                     exit_on_error=False, add_help=True, parents=[base_parser])

    # Add subparsers
    subparsers = parser.add_subparsers(dest="command")
    # python -m speed accountant
    accountant_parser = subparsers.add_parser("accountant", help="Compute the (epsilon, delta) guarantee of a votes file.",
                                              parents=[base_parser])
    # python -m speed simulate
    simulate_parser = subparsers.add_parser("simulate", help="Run a labelling session on a synthetic ensemble.",
                                            parents=[base_parser])
    # python -m speed sweep
    sweep_parser = subparsers.add_parser("sweep", help="Sweep gamma or tau and write epsilon per grid point.",
                                         parents=[base_parser])
    # python -m speed dist-check
    dist_parser = subparsers.add_parser("dist-check", help="Check aggregated noise shares against their law.",
                                        parents=[base_parser])
    # python -m speed attack-demo
    attack_parser = subparsers.add_parser("attack-demo", help="Run the malicious-aggregator inference demo.",
                                          parents=[base_parser])
    # python -m speed argmax-bench
    bench_parser = subparsers.add_parser("argmax-bench", help="Calibrate and benchmark the noisy argmax circuit.",
                                         parents=[base_parser])
    all_parsers = [accountant_parser, simulate_parser, sweep_parser, dist_parser, attack_parser, bench_parser]

    # All flags default to None so that values from the config file are only overridden when given
    config_arg = {"type": Path, "help": "A TOML config file; flags override its values."}
    out_arg = {"type": Path, "help": "Output directory for artifacts."}
    seed_arg = {"type": int, "help": "Root seed of all random streams."}
    gamma_arg = {"type": float, "help": "Inverse scale of the aggregated Laplace noise."}
    tau_arg = {"type": float, "help": "Ratio of teachers whose noise stays secret, snapped to round(tau n)/n."}
    teachers_arg = {"type": int, "help": "Number of teachers n."}
    classes_arg = {"type": int, "help": "Number of classes K."}
    queries_arg = {"type": int, "help": "Number of queries."}
    delta_arg = {"type": float, "help": "Target delta of the (epsilon, delta) guarantee."}
    lmax_arg = {"type": int, "help": "Highest moment order tracked by the accountant."}
    votes_arg = {"type": Path, "help": "A votes file (.json, or .csv with one query per row)."}
    viewpoint_arg = {"choices": ["outsider", "colluder", "honest"], "help": "The viewpoint tau is taken from."}
    published_arg = {"action": "store_true", "default": None, "help": "Colluders publish their noise."}
    mode_arg = {"choices": ["distributed", "centralised", "no-noise"], "help": "Who adds the noise."}
    he_arg = {"choices": ["off", "ideal", "noisy"], "help": "The argmax backend; off takes it in the clear."}
    ensemble_arg = {"choices": ["unanimous", "uniform", "majority"], "help": "The synthetic teacher ensemble."}
    error_rate_arg = {"type": float, "help": "Per-teacher error rate of the majority ensemble."}
    workers_arg = {"type": int, "help": "Threads running queries concurrently."}
    param_arg = {"choices": ["gamma", "tau"], "dest": "sweep_param", "help": "The swept parameter."}
    range_arg = {"dest": "sweep_range", "help": "Comma separated values, or start:stop:num."}
    samples_arg = {"type": int, "help": "Number of aggregated noise samples (>= 10000)."}
    method_arg = {"choices": ["shares", "collapsed"], "help": "Sum shares one by one, or draw their sum directly."}
    reference_gamma_arg = {"type": float, "help": "gamma of the reference distribution (defaults to --gamma)."}
    sigma_c_arg = {"type": float, "help": "Phase noise of the noisy backend; calibrated when not given."}
    trials_arg = {"type": int, "help": "Number of Monte-Carlo trials."}

    # Distribute the arguments to the subparsers. Make sure to add any new arguments to ExperimentConfig
    _add_to_parsers(all_parsers, "--config", config_arg)
    _add_to_parsers(all_parsers, "--out", out_arg)
    _add_to_parsers(all_parsers, "--seed", seed_arg)
    _add_to_parsers(all_parsers, "--gamma", gamma_arg)
    _add_to_parsers(all_parsers, "--tau", tau_arg)
    _add_to_parsers(all_parsers, "--teachers", teachers_arg)
    _add_to_parsers(all_parsers, "--classes", classes_arg)
    _add_to_parsers([accountant_parser, simulate_parser, sweep_parser], "--queries", queries_arg)
    _add_to_parsers([accountant_parser, simulate_parser, sweep_parser], "--delta", delta_arg)
    _add_to_parsers([accountant_parser, simulate_parser, sweep_parser], "--lmax", lmax_arg)
    _add_to_parsers([accountant_parser, simulate_parser, sweep_parser], "--viewpoint", viewpoint_arg)
    _add_to_parsers([accountant_parser, simulate_parser, sweep_parser, attack_parser], "--published", published_arg)
    _add_to_parsers([accountant_parser, sweep_parser], "--votes", votes_arg)
    _add_to_parsers([simulate_parser], "--mode", mode_arg)
    _add_to_parsers([simulate_parser], "--he", he_arg)
    _add_to_parsers([simulate_parser], "--ensemble", ensemble_arg)
    _add_to_parsers([simulate_parser], "--error-rate", error_rate_arg)
    _add_to_parsers([simulate_parser], "--workers", workers_arg)
    _add_to_parsers([sweep_parser], "--param", param_arg)
    _add_to_parsers([sweep_parser], "--range", range_arg)
    _add_to_parsers([dist_parser], "--samples", samples_arg)
    _add_to_parsers([dist_parser], "--method", method_arg)
    _add_to_parsers([dist_parser], "--reference-gamma", reference_gamma_arg)
    _add_to_parsers([simulate_parser, bench_parser], "--sigma-c", sigma_c_arg)
    _add_to_parsers([attack_parser], "--trials", {**trials_arg, "dest": "attack_trials"})
    _add_to_parsers([bench_parser], "--trials", {**trials_arg, "dest": "bench_trials"})

    version_arg = {"action": "store_true", "help": "Print the version and exit."}
    _add_to_parsers([parser], "--version", version_arg)  # only the main parser so add at the end

    return parser
