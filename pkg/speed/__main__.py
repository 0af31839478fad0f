import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from speed import app_name, speed_dir, __version__, get_parser
from speed.speed_log import configure_logging, start_logging, init_logging, set_run_context
from speed.src_py.errors import DomainError, VotesFormatError

# use global logger
logger = logging.getLogger(app_name)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4

# keys of the parsed arguments that are not experiment parameters
_NON_CONFIG_ARGS = ("command", "config", "verbose", "quiet", "version")


def except_hook(exc_type, exc_value, exc_tb):
    if exc_type is KeyboardInterrupt:
        logger.debug("User interrupted the program, exiting.")
    else:
        logger.exception("An unhandled exception occurred", exc_info=(exc_type, exc_value, exc_tb))


def exec_action(args) -> int:
    """
    Runs the selected subcommand.
    :return: the process exit code
    """
    from speed.src_py.cli.actions import COMMANDS
    from speed.src_py.cli.ExperimentConfig import ExperimentConfig

    if args.command is None:
        logger.warning("No command specified. For more information, use --help")
        return EXIT_USAGE
    if args.command not in COMMANDS:
        logger.error(f"Unknown command: {args.command}")
        return EXIT_USAGE

    overrides = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG_ARGS}
    try:
        config = ExperimentConfig.load(args.config, overrides)
        config.validate(args.command)
        set_run_context(args.command, config.seed)
        logger.debug(f"Running {args.command}", extra={"config": config.to_dict()})
        COMMANDS[args.command](config)
    except (OSError, VotesFormatError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except DomainError as e:
        logger.error(f"Invalid parameter {e.parameter}: {e}")
        return EXIT_DOMAIN
    except Exception as e:
        logger.exception(f"{args.command} failed: {e}")
        return EXIT_FAILURE
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    # for writing logs before logging is configured
    install_log = speed_dir / "logs" / "install.log"
    Path(install_log).parent.mkdir(parents=True, exist_ok=True)
    try:
        init_logging()
        start_logging()
    except Exception as e:
        with open(install_log, "a+") as f:
            f.write("Failed to configure logging\n")
            f.write(str(e) + "\n")

    try:
        parser = get_parser()
        args = parser.parse_args(argv)
    except argparse.ArgumentError as e:
        logger.error(f"Argument parsing failed at {e}")
        return EXIT_USAGE
    configure_logging(args.verbose, args.quiet)

    # set global exception hook to the generic one
    sys.excepthook = except_hook

    # if version is requested, print it and exit
    if args.version:
        print(__version__)
        return EXIT_OK

    return exec_action(args)


if __name__ == '__main__':
    sys.exit(main())
