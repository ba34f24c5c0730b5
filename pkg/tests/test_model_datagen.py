import numpy as np
from pytest import approx, raises

from src.guard import ConfigError
from src.model.constants import TEST_RANGE, TRAIN_RANGE
from src.model.data import TargetFunction
from src.model.datagen import (
    generate,
    generate_cached,
    histogram,
    target_value,
)
from src.model.tensor import ShapeError


def test_target_values() -> None:

    product = TargetFunction.product
    assert target_value(product(2, normalized=True), [20, 30]) == 60.0
    assert target_value(product(3), [2, 3, 4]) == 24.0
    assert target_value(product(4, normalized=True), [10] * 4) == 10.0
    assert target_value(TargetFunction.complex(), [2, 3, 4, 5]) == 19.0
    assert target_value(TargetFunction.quotient(), [6, 3]) == 2.0

    with raises(ShapeError):
        target_value(TargetFunction.complex(), [1, 2])


def test_generate() -> None:

    target = TargetFunction.product(2)
    data = generate(target, *TRAIN_RANGE, 10_000, seed=0)

    assert data.x.shape == (10_000, 2)
    assert data.y.shape == (10_000, 1)
    assert len(data) == 10_000
    assert data.n_inputs == 2
    assert (data.x >= 10.0).all() and (data.x < 100.0).all()
    assert data.x.mean() == approx(55.0, abs=1.0)
    assert (data.y[:, 0] == data.x[:, 0] * data.x[:, 1]).all()


def test_ranges_are_disjoint() -> None:

    target = TargetFunction.complex()
    train = generate(target, *TRAIN_RANGE, 2000, seed=1)
    test = generate(target, *TEST_RANGE, 2000, seed=2)
    assert train.x.max() < test.x.min()


def test_generate_is_deterministic() -> None:

    target = TargetFunction.product(3, normalized=True)
    a = generate(target, 10.0, 100.0, 500, seed=42)
    b = generate(target, 10.0, 100.0, 500, seed=42)
    c = generate(target, 10.0, 100.0, 500, seed=43)

    assert (a.x == b.x).all() and (a.y == b.y).all()
    assert not (a.x == c.x).all()
    assert generate_cached(target, 10.0, 100.0, 500, 42) is generate_cached(
        target, 10.0, 100.0, 500, 42
    )


def test_generate_rejects_bad_input() -> None:

    target = TargetFunction.product(2)
    with raises(ConfigError):
        generate(target, 100.0, 10.0, 100, seed=0)
    with raises(ConfigError):
        generate(target, 10.0, 10.0, 100, seed=0)
    with raises(ConfigError):
        generate(target, 10.0, 100.0, 0, seed=0)


def test_histogram() -> None:

    data = generate(TargetFunction.product(3), 10.0, 100.0, 1000, seed=5)
    hist = histogram(data, 20)

    assert hist.counts.sum() == 3000
    assert len(hist.edges) == 21
    assert hist.edges[0] == data.x.min()
    assert hist.edges[-1] == data.x.max()
    # roughly flat: no bin far from the expected 150
    assert (np.abs(hist.counts - 150) < 60).all()

    frame = hist.to_frame()
    assert list(frame.columns) == ["left", "right", "count"]
    assert len(frame) == 20

    with raises(ConfigError):
        histogram(data, 0)
