from itertools import product
from pathlib import Path

import numpy as np
from pytest import approx, mark, raises

from src.guard import ConfigError
from src.model import tensor as tn
from src.model.activations import UnknownActivationError
from src.model.calc_primitives import derive_seed
from src.model.constants import BASELINE_ACTIVATIONS, PROPOSED_PAIR
from src.model.network import (
    Network,
    NetworkSpec,
    Params,
    backward,
    forward,
    handset_product_network,
    init_network,
    predict,
)
from src.model.tensor import ShapeError

ALL_PAIRS = [PROPOSED_PAIR] + list(
    product(BASELINE_ACTIVATIONS, BASELINE_ACTIVATIONS)
)


def _with_entry(net: Network, field: int, ix: int, delta: float) -> Network:
    arr = np.array(net.params[field])
    arr.flat[ix] += delta
    new = tn.as_matrix(arr) if arr.ndim == 2 else tn.as_vector(arr)
    params = list(net.params)
    params[field] = new
    return Network(net.spec, Params(*params))


def _linear_loss(net: Network, x: np.ndarray, u: np.ndarray) -> float:
    return float(np.sum(u * predict(net, x)))


@mark.parametrize("a1,a2", ALL_PAIRS)
def test_gradient_check(a1: str, a2: str) -> None:

    rng = np.random.default_rng(derive_seed(0, a1, a2))
    spec = NetworkSpec(2, 3, 3, a1, a2, init_seed=7)
    net = init_network(spec)
    x = tn.as_matrix(rng.uniform(-2.0, 2.0, size=(4, 2)))
    u = tn.as_matrix(rng.normal(size=(4, 1)))

    grads = backward(net, forward(net, x), u)

    h = 1e-6
    for field, grad in enumerate(grads):
        assert grad.shape == net.params[field].shape
        for ix in range(grad.size):
            plus = _linear_loss(_with_entry(net, field, ix, h), x, u)
            minus = _linear_loss(_with_entry(net, field, ix, -h), x, u)
            fd = (plus - minus) / (2 * h)
            exact = grad.flat[ix]
            assert abs(fd - exact) <= 1e-4 * max(1.0, abs(exact)), (
                Params._fields[field],
                ix,
            )


def test_init_is_deterministic() -> None:

    spec = NetworkSpec(3, init_seed=11)
    a = init_network(spec)
    b = init_network(spec)
    for pa, pb in zip(a.params, b.params):
        assert (pa == pb).all()

    c = init_network(NetworkSpec(3, init_seed=12))
    assert not (a.params.w1 == c.params.w1).all()


def test_glorot_init() -> None:

    net = init_network(NetworkSpec(4, 8, 8, init_seed=3))
    p = net.params
    for w, (fan_in, fan_out) in (
        (p.w1, (4, 8)),
        (p.w2, (8, 8)),
        (p.w3, (8, 1)),
    ):
        assert w.shape == (fan_in, fan_out)
        assert (np.abs(w) <= np.sqrt(6.0 / (fan_in + fan_out))).all()
    for b in (p.b1, p.b2, p.b3):
        assert (b == 0.0).all()


def test_handset_product_network() -> None:

    net = handset_product_network()
    assert net.spec.pair == PROPOSED_PAIR

    x = tn.as_matrix([[2.0, 3.0], [0.0, 0.0], [100.0, 999.0]])
    y = predict(net, x)
    assert y.shape == (3, 1)
    assert y[:, 0] == approx([11.0, 0.0, 101 * 1000 - 1], rel=1e-12)


def test_forward_shapes() -> None:

    net = init_network(NetworkSpec(2, 5, 4))
    trace = forward(net, tn.as_matrix(np.ones((7, 2))))
    assert trace.z1.shape == trace.h1.shape == (7, 5)
    assert trace.z2.shape == trace.h2.shape == (7, 4)
    assert trace.yhat.shape == (7, 1)

    with raises(ShapeError):
        forward(net, tn.as_matrix(np.ones((7, 3))))
    with raises(ShapeError):
        backward(net, trace, tn.as_matrix(np.ones((6, 1))))


def test_spec_validation() -> None:

    with raises(ConfigError):
        NetworkSpec(0)
    with raises(ConfigError):
        NetworkSpec(2, hidden1_width=0)
    with raises(UnknownActivationError):
        NetworkSpec(2, a1="gelu")

    net = init_network(NetworkSpec(2))
    with raises(ShapeError):
        Network(NetworkSpec(3), net.params)


def test_json_round_trip(tmp_path: Path) -> None:

    net = init_network(NetworkSpec(3, 4, 5, "tanh", "softmax", init_seed=5))
    path = tmp_path / "net.json"
    net.save(path)
    loaded = Network.load(path)

    assert loaded.spec == net.spec
    for pa, pb in zip(net.params, loaded.params):
        assert pa.shape == pb.shape
        assert (pa == pb).all()

    with raises(ConfigError):
        Network.from_json('{"spec": {}, "params": {}}')
    with raises(ConfigError):
        Network.from_json("not json")
