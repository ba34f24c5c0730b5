import sys
from logging import INFO, Formatter, Logger, StreamHandler, getLogger
from math import isfinite

from colored import fg, stylize


def color(col: str, msg: str) -> str:
    out: str = stylize(msg, fg(col), reset=True)
    return out


_LOGGERS: set[str] = set()


def get_logger(name: str, level: int = INFO, col: str = "white") -> Logger:
    """
    A stderr logger with the house format. Calling this again for the same name
    replaces the handler rather than stacking a second one.
    """
    _LOGGERS.add(name)
    log = getLogger(name)
    log.setLevel(level)
    log.handlers.clear()
    log.addHandler(StreamHandler(sys.stderr))
    log.handlers[0].setFormatter(
        Formatter(
            color(col, "{asctime} " + name + "-{levelname} ∷ {message}"),
            style="{",
        )
    )
    log.propagate = False
    return log


def fmt_pair(a1: str, a2: str) -> str:
    return f"{a1}_{a2}"


def fmt_metric(val: float, width: int = 10) -> str:
    if not isfinite(val):
        return f"{'diverged':>{width}s}"
    if abs(val) >= 1e6:
        return f"{val:>{width}.3g}"
    return f"{val:>{width},.4f}"


def set_level(level: int) -> None:
    """
    Sets the level of every logger made by get_logger.
    """
    for name in _LOGGERS:
        getLogger(name).setLevel(level)
