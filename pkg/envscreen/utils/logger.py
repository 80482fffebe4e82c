"""
Console and file logging for envscreen, after detectron2's ``setup_logger``
and ``log_first_n`` helpers, reduced to what scenario runs need.
"""
import functools
import logging
import os
import sys
from collections import Counter

from termcolor import colored

from .file_io import PathManager

__all__ = ["setup_logger", "log_first_n"]

_PLAIN_FORMAT = "[%(asctime)s] %(name)s %(levelname)s: %(message)s"
_DATE_FORMAT = "%m/%d %H:%M:%S"


class _LevelTagFormatter(logging.Formatter):
    """Short logger names, and a colored tag in front of warnings and errors."""

    def __init__(self, root_name: str, short_name: str):
        super().__init__(colored("[%(asctime)s %(name)s]: ", "green") + "%(message)s", datefmt=_DATE_FORMAT)
        self._root = root_name
        self._short = short_name

    def formatMessage(self, record):
        if record.name.startswith(self._root):
            record.name = self._short + record.name[len(self._root):]
        text = super().formatMessage(record)
        if record.levelno >= logging.ERROR:
            return colored("ERROR", "red", attrs=["underline"]) + " " + text
        if record.levelno == logging.WARNING:
            return colored("WARNING", "red") + " " + text
        return text


@functools.lru_cache()
def setup_logger(output=None, *, color=True, name="envscreen"):
    """
    Attach a stdout handler and, when ``output`` is given, a file handler to
    the ``name`` logger. Repeated calls with the same arguments return the
    already configured logger.

    Args:
        output (str): a ``.txt``/``.log`` file, or a directory that gets ``log.txt``.
        color (bool): colored console output.
        name (str): root logger name; "envscreen" is shown as "es".

    Returns:
        logging.Logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    console = logging.StreamHandler(stream=sys.stdout)
    console.setLevel(logging.DEBUG)
    if color:
        console.setFormatter(_LevelTagFormatter(name, "es" if name == "envscreen" else name))
    else:
        console.setFormatter(logging.Formatter(_PLAIN_FORMAT, datefmt=_DATE_FORMAT))
    logger.addHandler(console)

    if output is not None:
        filename = output if output.endswith((".txt", ".log")) else os.path.join(output, "log.txt")
        PathManager.mkdirs(os.path.dirname(filename) or ".")
        handler = logging.StreamHandler(_open_log(filename))
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter(_PLAIN_FORMAT, datefmt=_DATE_FORMAT))
        logger.addHandler(handler)
    return logger


@functools.lru_cache(maxsize=None)
def _open_log(filename):
    return PathManager.open(filename, "a")


_SEEN = Counter()


def log_first_n(lvl, msg, n=1, *, name="envscreen", key=None):
    """
    Log ``msg`` on the ``name`` logger at most ``n`` times per ``key``
    (default: the message itself).
    """
    counter_key = (name, msg if key is None else key)
    _SEEN[counter_key] += 1
    if _SEEN[counter_key] <= n:
        logging.getLogger(name).log(lvl, msg)
