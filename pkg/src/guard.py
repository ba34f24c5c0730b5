"""
This file defines primitives that keep numeric quantities inside the range in
which training results can be trusted: configuration knobs at the time they are
read, and the values flowing through a network at the time they are computed.

Two kinds of failure are distinguished. A configuration value beyond its block
level is a user error and raises ConfigError. A computed value beyond its block
level (an exploding pre-activation, a NaN loss) means the trial has diverged
and raises DivergenceFault, which the training loop records instead of
propagating.

This module should not care if parameters are merely unhelpful, e.g. a learning
rate so small that nothing is learned in 100 epochs.
"""
from __future__ import annotations

import operator
from abc import abstractmethod
from dataclasses import dataclass
from logging import INFO
from typing import Callable, Generic, Type, TypeVar

import numpy as np
import numpy.typing as npt

from src.util.format import get_logger

LOG = get_logger("NUMGUARD", level=INFO, col="yellow")


class ConfigError(ValueError):
    """
    Raised when a configuration value, target spec or plan file is invalid.
    """


class DivergenceFault(ArithmeticError):
    """
    Raised when a computed value leaves the finite range the model can
    represent. Callers in the training loop convert this into a diverged trial.
    """


T = TypeVar("T", int, float)


@dataclass(frozen=True)  # type: ignore
class TwoTierGeneric(Generic[T]):

    name: str
    block_level: T
    notify_level: T
    msg: str
    fault: Type[Exception]
    cmp_op: Callable[[T, T], bool]

    def __post_init__(self) -> None:
        assert self.cmp_op is not None

    def validate(self, val: T) -> T:
        if self.cmp_op(val, self.block_level):  # type: ignore
            LOG.debug(
                f"[{self.name}]("
                f"{self.fmt_val(val)} {self.fmt_op()} {self.block_level}) "
                "rejected by rule."
            )
            raise self.fault(f"{self.msg} ({self.name}={self.fmt_val(val)})")
        if self.cmp_op(val, self.notify_level):  # type: ignore
            LOG.warning(
                f"[{self.name}]({self.fmt_val(val)} {self.fmt_op()} "
                f"{self.notify_level}) {self.msg}"
            )
        return val

    @abstractmethod
    def fmt_val(self, val: T) -> str:
        """
        Formats the checked value for logging.
        """

    @abstractmethod
    def fmt_op(self) -> str:
        """
        :return:  a string representation of the operator
        """


@dataclass(frozen=True)
class TwoTierNMax(TwoTierGeneric[T]):
    """
    Notify/block policy for numbers that should not exceed some maximum.
    """

    cmp_op: Callable[[T, T], bool] = operator.gt

    def __post_init__(self) -> None:
        super().__post_init__()
        assert self.block_level >= self.notify_level

    def fmt_val(self, val: T) -> str:
        if isinstance(val, float):
            return f"{val:.3g}"
        else:
            return f"{val:0d}"

    def fmt_op(self) -> str:
        return ">"


@dataclass(frozen=True)
class TwoTierNMin(TwoTierGeneric[T]):
    """
    Notify/block policy for numbers that should not go under some minimum.
    """

    cmp_op: Callable[[T, T], bool] = operator.lt

    def __post_init__(self) -> None:
        super().__post_init__()
        assert self.block_level <= self.notify_level

    def fmt_val(self, val: T) -> str:
        if isinstance(val, float):
            return f"{val:.3g}"
        else:
            return f"{val:0d}"

    def fmt_op(self) -> str:
        return "<"


class Policy:
    """
    The numeric policy object.

    The class members of Policy are the limits checked throughout program flow.
    """

    # e^700 is near the float64 ceiling; anything past it is an overflow
    SYMEXP_ARG = TwoTierNMax(
        "SYMEXP ARG", 700.0, 700.0, "Symmetric exp overflow.", DivergenceFault
    )

    LEARNING_RATE_MAX = TwoTierNMax(
        "LEARNING RATE", 1.0, 0.1, "Large learning rate.", ConfigError
    )
    EPOCHS = TwoTierNMin("EPOCHS", 1, 1, "Need at least one epoch.", ConfigError)
    BATCH_SIZE = TwoTierNMin(
        "BATCH SIZE", 1, 1, "Need at least one sample per batch.", ConfigError
    )
    WIDTH = TwoTierNMin(
        "LAYER WIDTH", 1, 1, "Layer widths must be positive.", ConfigError
    )
    WIDTH_MAX = TwoTierNMax(
        "LAYER WIDTH", 4096, 256, "Very wide hidden layer.", ConfigError
    )
    SAMPLES = TwoTierNMin(
        "SAMPLES", 1, 100, "Very few samples.", ConfigError
    )
    JOBS = TwoTierNMin("JOBS", 1, 1, "Need at least one worker.", ConfigError)


def assert_finite(arr: npt.NDArray[np.float64], where: str) -> None:
    if not np.isfinite(arr).all():
        LOG.debug(f"Non-finite values in {where}.")
        raise DivergenceFault(f"numeric overflow in {where}")
