import logging

logger = logging.getLogger("Cli")
