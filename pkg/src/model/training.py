"""
MAE loss, the Adam optimizer, and the mini-batch training loop.
"""
from __future__ import annotations

from configparser import ConfigParser
from dataclasses import dataclass, fields
from logging import Logger
from math import inf, isfinite
from typing import NamedTuple, Optional

import numpy as np

from src.guard import ConfigError, DivergenceFault, Policy
from src.model import tensor as tn
from src.model.data import Dataset
from src.model.network import Gradients, Network, Params, backward, forward
from src.model.tensor import Matrix, ShapeError
from src.util.format import get_logger

LOG = get_logger("training")


@dataclass(frozen=True)
class TrainConfig:

    epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-7
    shuffle_seed: int = 0

    def __post_init__(self) -> None:
        Policy.EPOCHS.validate(self.epochs)
        Policy.BATCH_SIZE.validate(self.batch_size)
        for name in ("learning_rate", "adam_beta1", "adam_beta2"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1)")
        Policy.LEARNING_RATE_MAX.validate(self.learning_rate)
        if not self.adam_epsilon > 0.0:
            raise ConfigError("adam_epsilon must be positive")

    @classmethod
    def read_config(
        cls, cfg: ConfigParser, base: Optional[TrainConfig] = None
    ) -> TrainConfig:
        """
        The [train] section over `base` (the defaults if not given).
        """
        default = base or cls()
        if not cfg.has_section("train"):
            return default
        train = cfg["train"]
        return cls(
            epochs=train.getint("epochs", default.epochs),
            batch_size=train.getint("batch_size", default.batch_size),
            learning_rate=train.getfloat(
                "learning_rate", default.learning_rate
            ),
            adam_beta1=train.getfloat("adam_beta1", default.adam_beta1),
            adam_beta2=train.getfloat("adam_beta2", default.adam_beta2),
            adam_epsilon=train.getfloat("adam_epsilon", default.adam_epsilon),
            shuffle_seed=train.getint("shuffle_seed", default.shuffle_seed),
        )

    def dump_config(self) -> str:
        return "\n".join(
            f"{field.name}={getattr(self, field.name)}"
            for field in fields(self)
        )


@dataclass
class AdamState:
    """
    First and second moment accumulators per parameter tensor.
    """

    m: Params
    v: Params
    t: int = 0

    @classmethod
    def for_params(cls, params: Params) -> AdamState:
        zeros = Params(*(np.zeros_like(p) for p in params))
        return cls(m=zeros, v=zeros, t=0)


class TrainOutcome(NamedTuple):
    losses: tuple[float, ...]
    diverged: bool


def _check_columns(yhat: Matrix, y: Matrix) -> None:
    if yhat.shape != y.shape or yhat.ndim != 2 or yhat.shape[1] != 1:
        raise ShapeError(
            f"column vectors expected: {yhat.shape} vs {y.shape}"
        )
    if yhat.shape[0] < 1:
        raise ShapeError("empty batch")


def mae_loss(yhat: Matrix, y: Matrix) -> float:
    _check_columns(yhat, y)
    return float(np.mean(np.abs(yhat - y)))


def mae_grad(yhat: Matrix, y: Matrix) -> Matrix:
    """
    Subgradient of mae_loss with respect to yhat; zero at ties.
    """
    _check_columns(yhat, y)
    return tn.scale(np.sign(yhat - y), 1.0 / y.shape[0])


def adam_step(
    params: Params, grads: Gradients, state: AdamState, cfg: TrainConfig
) -> tuple[Params, AdamState]:
    """
    One bias-corrected Adam update of every parameter tensor, with epsilon
    added outside the square root.

    Raises DivergenceFault if any updated parameter is non-finite.
    """
    for p, g in zip(params, grads):
        if p.shape != g.shape:
            raise ShapeError(f"adam_step: param {p.shape} vs grad {g.shape}")

    t = state.t + 1
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t

    new_p: list[Matrix] = []
    new_m: list[Matrix] = []
    new_v: list[Matrix] = []
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * np.square(g)
        m_hat = m / bc1
        v_hat = v / bc2
        step = cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_epsilon)
        new_p.append(tn.sub(p, step))
        new_m.append(m)
        new_v.append(v)

    return Params(*new_p), AdamState(Params(*new_m), Params(*new_v), t)


def train(
    net: Network,
    data: Dataset,
    cfg: TrainConfig,
    log: Optional[Logger] = None,
) -> TrainOutcome:
    """
    Mini-batch training with a fresh shuffle per epoch.

    Returns the per-epoch training MAE (the sample-weighted mean of the batch
    losses). A diverged run stops early; its last entry is +inf.
    """
    log = log or LOG
    if data.n_inputs != net.spec.input_width:
        raise ShapeError(
            f"data has {data.n_inputs} inputs, net expects "
            f"{net.spec.input_width}"
        )

    rng = np.random.Generator(np.random.PCG64(cfg.shuffle_seed))
    state = AdamState.for_params(net.params)
    n = len(data)
    losses: list[float] = []

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        x_ep = tn.take_rows(data.x, order)
        y_ep = tn.take_rows(data.y, order)
        total = 0.0
        try:
            for start in range(0, n, cfg.batch_size):
                stop = min(start + cfg.batch_size, n)
                xb = tn.row_range(x_ep, start, stop)
                yb = tn.row_range(y_ep, start, stop)

                trace = forward(net, xb)
                loss = mae_loss(trace.yhat, yb)
                if not isfinite(loss):
                    raise DivergenceFault(f"loss {loss} in epoch {epoch}")
                grads = backward(net, trace, mae_grad(trace.yhat, yb))
                params, state = adam_step(net.params, grads, state, cfg)
                net.assign(params)
                total += loss * (stop - start)
        except DivergenceFault as e:
            log.debug(f"{net.spec.a1}_{net.spec.a2} diverged: {e}")
            losses.append(inf)
            return TrainOutcome(tuple(losses), diverged=True)

        losses.append(total / n)
        log.debug(f"epoch {epoch + 1:>3d}/{cfg.epochs}: loss={losses[-1]:.6g}")

    return TrainOutcome(tuple(losses), diverged=False)
