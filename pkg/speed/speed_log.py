import atexit
import copy
import datetime as dt
import json
import logging
import logging.config
import os
import sys
from logging import handlers
from typing import Any, Optional

import numpy as np

from speed import res_dir, log_dir

# Environment variable selecting the root level when neither -v nor -q is given
LOG_ENV_VAR = "SPEED_LOG"

# attributes every LogRecord has; anything else was passed with extra=
LOG_RECORD_BUILTIN_ATTRS = frozenset(vars(logging.LogRecord("", 0, "", 0, "", (), None))) | {"message", "asctime"}

_ENV_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "QUIET": logging.CRITICAL + 1,
}


class SpeedLogQueueHandler(handlers.QueueHandler):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.setFormatter(logging.Formatter())

    def prepare(self, record):
        exc_info = record.exc_info
        record = copy.copy(record)
        # the traceback travels as exc_text, formatted on this side of the queue
        record.exc_info = None
        record.message = self.format(record)
        record.exc_text = self.formatter.formatException(exc_info) if exc_info else None
        return record


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    return str(value)


class SpeedLog(logging.Formatter):
    """
    Formats every record as one JSON line. Keys named in fmt_keys come first, then the fields passed
    with extra= (numpy values become plain JSON numbers and lists).
    """

    def __init__(self, *, fmt_keys: dict[str, str] | None = None):
        super().__init__()
        self.fmt_keys = fmt_keys if fmt_keys is not None else {}

    def format(self, record: logging.LogRecord) -> str:
        return json.dumps(self._prepare_log_dict(record), default=_jsonable)

    def _prepare_log_dict(self, record: logging.LogRecord) -> dict:
        computed = {
            "message": record.getMessage(),
            "timestamp": dt.datetime.fromtimestamp(record.created, tz=dt.timezone.utc).isoformat(),
        }
        if record.exc_info is not None:
            computed["exc_info"] = self.formatException(record.exc_info)
        if record.stack_info is not None:
            computed["stack_info"] = self.formatStack(record.stack_info)

        out = {}
        for key, attr in self.fmt_keys.items():
            value = computed.pop(attr, None)
            out[key] = value if value is not None else getattr(record, attr, None)
        out.update(computed)
        out.update({k: v for k, v in record.__dict__.items() if k not in LOG_RECORD_BUILTIN_ATTRS})
        return out


class RunContext(logging.Filter):
    """Stamps records with the running subcommand and its root seed, so log lines can be matched to artifacts."""
    command: Optional[str] = None
    seed: Optional[int] = None

    def filter(self, record: logging.LogRecord) -> bool:
        record.command = RunContext.command
        record.seed = RunContext.seed
        return True


def set_run_context(command: Optional[str], seed: Optional[int] = None):
    RunContext.command = command
    RunContext.seed = seed


def remove_queue_handler(config: dict):
    queue_handler = config["handlers"].pop("queue_handler")
    queue_handler.pop("class")
    queue_handler.pop("respect_handler_level", None)
    queue_handler["level"] = "DEBUG"
    config["loggers"]["root"] = queue_handler


def modify_log_config(config: dict):
    # QueueHandler configuration through dictConfig needs 3.12
    if sys.version_info < (3, 12):
        remove_queue_handler(config)

    for handler_config in config["handlers"].values():
        if "filename" in handler_config:
            handler_config["filename"] = str(log_dir / handler_config["filename"])


def init_logging():
    import tomllib
    log_dir.mkdir(parents=True, exist_ok=True)
    with open(res_dir / "log_config.toml", "rb") as f:
        config = tomllib.load(f)
    modify_log_config(config)
    logging.config.dictConfig(config)


def start_logging():
    if (3, 12) <= sys.version_info:
        queue_handler = logging.getHandlerByName("queue_handler")
        if queue_handler is not None and hasattr(queue_handler, "listener"):
            queue_handler.listener.start()
            atexit.register(queue_handler.listener.stop)
    atexit.register(logging.shutdown)


def env_level(value: Optional[str] = None) -> Optional[int]:
    """
    Resolves the SPEED_LOG environment variable to a logging level.
    :param value: the raw value, read from the environment when None
    :return: the level, or None if unset or unrecognised
    """
    value = os.environ.get(LOG_ENV_VAR) if value is None else value
    if not value:
        return None
    return _ENV_LEVELS.get(value.strip().upper())


def configure_logging(verbose: bool = False, quiet: bool = False):
    if verbose and quiet:
        return  # don't change the log level if both verbose and quiet are set
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.CRITICAL + 1
    else:
        level = env_level()
        if level is None:
            level = logging.INFO
    logging.getLogger().setLevel(level)
