"""
The shallow regressor: input -> dense + A1 -> dense + A2 -> dense (linear) -> y.

With A1 = symlog and A2 = symexp the hidden stack computes
    symexp(Σ_j w_j symlog(x_j) + b) ≈ e^b ∏_j x_j^{w_j}
for large positive inputs, which is what lets it represent products.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from src.guard import ConfigError, Policy
from src.model import tensor as tn
from src.model.activations import (
    activation_jacobian_apply,
    apply_activation,
    get_activation,
)
from src.model.constants import DEFAULT_HIDDEN_WIDTH
from src.model.tensor import Matrix, ShapeError, Vector


@dataclass(frozen=True)
class NetworkSpec:

    input_width: int
    hidden1_width: int = DEFAULT_HIDDEN_WIDTH
    hidden2_width: int = DEFAULT_HIDDEN_WIDTH
    a1: str = "symlog"
    a2: str = "symexp"
    init_seed: int = 0

    def __post_init__(self) -> None:
        for width in (self.input_width, self.hidden1_width, self.hidden2_width):
            Policy.WIDTH.validate(width)
            Policy.WIDTH_MAX.validate(width)
        # fail early on unknown names
        get_activation(self.a1)
        get_activation(self.a2)

    @property
    def pair(self) -> tuple[str, str]:
        return self.a1, self.a2


class Params(NamedTuple):
    w1: Matrix
    b1: Vector
    w2: Matrix
    b2: Vector
    w3: Matrix
    b3: Vector


# the gradient set shares the parameter layout
Gradients = Params


class ForwardTrace(NamedTuple):
    x: Matrix
    z1: Matrix
    h1: Matrix
    z2: Matrix
    h2: Matrix
    z3: Matrix
    yhat: Matrix


@dataclass
class Network:
    """
    An instantiated NetworkSpec. Owned and mutated by exactly one trial.
    """

    spec: NetworkSpec
    params: Params

    def __post_init__(self) -> None:
        n, h1, h2 = (
            self.spec.input_width,
            self.spec.hidden1_width,
            self.spec.hidden2_width,
        )
        expected = ((n, h1), (h1,), (h1, h2), (h2,), (h2, 1), (1,))
        for p, shape, field in zip(self.params, expected, Params._fields):
            if p.shape != shape:
                raise ShapeError(f"{field}: {p.shape}, expected {shape}")

    def assign(self, params: Params) -> None:
        for old, new in zip(self.params, params):
            assert old.shape == new.shape
        self.params = params

    def to_json(self) -> str:
        return json.dumps(
            {
                "spec": asdict(self.spec),
                "params": {
                    name: {"shape": list(p.shape), "data": p.ravel().tolist()}
                    for name, p in zip(Params._fields, self.params)
                },
            }
        )

    @classmethod
    def from_json(cls, doc: str) -> Network:
        try:
            raw = json.loads(doc)
            spec = NetworkSpec(
                **{f.name: raw["spec"][f.name] for f in fields(NetworkSpec)}
            )
            params = Params(
                *(_restore(raw["params"][name]) for name in Params._fields)
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed network document: {e}") from e
        return cls(spec, params)

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())

    @classmethod
    def load(cls, path: Path) -> Network:
        return cls.from_json(path.read_text())


def _restore(entry: dict[str, Any]) -> Matrix:
    arr = np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])
    return tn.as_matrix(arr) if arr.ndim == 2 else tn.as_vector(arr)


def _glorot(
    rng: np.random.Generator, fan_in: int, fan_out: int
) -> tuple[Matrix, Vector]:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    w = tn.as_matrix(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    return w, tn.as_vector(np.zeros(fan_out))


def init_network(spec: NetworkSpec) -> Network:
    """
    Glorot-uniform weights from PCG64(init_seed), zero biases.
    """
    rng = np.random.Generator(np.random.PCG64(spec.init_seed))
    w1, b1 = _glorot(rng, spec.input_width, spec.hidden1_width)
    w2, b2 = _glorot(rng, spec.hidden1_width, spec.hidden2_width)
    w3, b3 = _glorot(rng, spec.hidden2_width, 1)
    return Network(spec, Params(w1, b1, w2, b2, w3, b3))


def handset_product_network() -> Network:
    """
    The untrained symlog/symexp network computing (x1 + 1)(x2 + 1) - 1 for
    non-negative inputs: W1 = I, W2 = [1, 1]ᵀ, W3 = [1], all biases zero.
    """
    spec = NetworkSpec(2, 2, 1, "symlog", "symexp")
    return Network(
        spec,
        Params(
            w1=tn.as_matrix(np.eye(2)),
            b1=tn.as_vector(np.zeros(2)),
            w2=tn.as_matrix([[1.0], [1.0]]),
            b2=tn.as_vector(np.zeros(1)),
            w3=tn.as_matrix([[1.0]]),
            b3=tn.as_vector(np.zeros(1)),
        ),
    )


def forward(net: Network, x: Matrix) -> ForwardTrace:
    """
    Raises DivergenceFault if any intermediate is non-finite.
    """
    if x.ndim != 2 or x.shape[1] != net.spec.input_width:
        raise ShapeError(
            f"forward: input {x.shape}, width {net.spec.input_width}"
        )
    p = net.params
    a1 = get_activation(net.spec.a1)
    a2 = get_activation(net.spec.a2)

    z1 = tn.add_row_broadcast(tn.matmul(x, p.w1), p.b1)
    h1 = apply_activation(a1, z1)
    z2 = tn.add_row_broadcast(tn.matmul(h1, p.w2), p.b2)
    h2 = apply_activation(a2, z2)
    z3 = tn.add_row_broadcast(tn.matmul(h2, p.w3), p.b3)
    # linear output layer
    return ForwardTrace(x, z1, h1, z2, h2, z3, z3)


def predict(net: Network, x: Matrix) -> Matrix:
    return forward(net, x).yhat


def backward(net: Network, trace: ForwardTrace, dl_dyhat: Matrix) -> Gradients:
    if dl_dyhat.shape != trace.yhat.shape:
        raise ShapeError(
            f"backward: upstream {dl_dyhat.shape} vs yhat {trace.yhat.shape}"
        )
    p = net.params
    a1 = get_activation(net.spec.a1)
    a2 = get_activation(net.spec.a2)

    d3 = dl_dyhat
    dw3 = tn.matmul(tn.transpose(trace.h2), d3)
    db3 = tn.column_sums(d3)

    d2 = activation_jacobian_apply(
        a2, trace.z2, tn.matmul(d3, tn.transpose(p.w3))
    )
    dw2 = tn.matmul(tn.transpose(trace.h1), d2)
    db2 = tn.column_sums(d2)

    d1 = activation_jacobian_apply(
        a1, trace.z1, tn.matmul(d2, tn.transpose(p.w2))
    )
    dw1 = tn.matmul(tn.transpose(trace.x), d1)
    db1 = tn.column_sums(d1)

    return Gradients(dw1, db1, dw2, db2, dw3, db3)
