"""Logging setup for the stonetype stages.

Stage logs go to stdout; stderr is reserved for the one-line JSON error
record the CLI emits when a stage fails.
"""

import logging
import os
import sys
from typing import Optional, TextIO

LOG_FORMAT = "%(name)s - %(levelname)s - %(message)s"
LEVEL_ENV = "STONETYPE_LOG_LEVEL"

# imaging and plotting libraries log font caches and PNG chunks below WARNING
QUIET_LIBRARIES = ("matplotlib", "PIL")


def level_for(verbose: bool = False, quiet: bool = False) -> int:
    """Map the CLI switches to a level; without either, STONETYPE_LOG_LEVEL or INFO."""
    if verbose:
        return logging.DEBUG
    if quiet:
        return logging.WARNING
    name = os.environ.get(LEVEL_ENV, "INFO").strip().upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.INFO


def setup_logging(level: int = logging.INFO, stream: Optional[TextIO] = None) -> None:
    """Install a single stream handler on the root logger, replacing any earlier one."""
    logging.basicConfig(
        level=level,
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(stream or sys.stdout)],
        force=True,
    )
    for name in QUIET_LIBRARIES:
        logging.getLogger(name).setLevel(level if level <= logging.DEBUG else logging.WARNING)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
