import json
from math import inf
from pathlib import Path

from pytest import raises

from src.guard import ConfigError
from src.model.data import (
    Dataset,
    EvalReport,
    TargetFunction,
    TrialResult,
)
from src.model.datagen import generate


def test_target_function() -> None:

    t = TargetFunction.parse("product:n=2,N=10")
    assert t == TargetFunction.product(2, normalized=True)
    assert t == TargetFunction("product", 2, 10.0)
    assert t.spec == "product:n=2,N=10"
    assert t.expression == "x1x2/10"
    assert TargetFunction.parse(t.spec) == t

    t = TargetFunction.parse("product:n=4")
    assert t.normalizer == 1.0
    assert t.expression == "x1x2x3x4"
    assert TargetFunction.product(4, normalized=True).normalizer == 1000.0

    assert TargetFunction.parse("complex") == TargetFunction.complex()
    assert TargetFunction.parse("quotient").n_inputs == 2
    assert TargetFunction.complex().expression == "x1(x2+x3)+x4"

    for bad in ("product:n=5", "product:n=1", "product", "sum", "complex:n=4"):
        with raises(ConfigError):
            TargetFunction.parse(bad)
    with raises(ConfigError):
        TargetFunction("complex", 3)
    with raises(ConfigError):
        TargetFunction("product", 2, 0.5)


def test_target_ordering() -> None:

    targets = [
        TargetFunction.product(3),
        TargetFunction.complex(),
        TargetFunction.product(2, normalized=True),
        TargetFunction.product(2),
    ]
    assert sorted(targets)[0] == TargetFunction.complex()
    assert len(set(targets + [TargetFunction.product(2)])) == 4


def test_dataset_round_trip(tmp_path: Path) -> None:

    data = generate(TargetFunction.product(3), 10.0, 100.0, 50, seed=8)
    path = tmp_path / "sub" / "train.csv"
    data.save(path)

    header = path.read_text().splitlines()[0]
    assert header == "x1,x2,x3,y"

    meta = json.loads(path.with_suffix(".json").read_text())
    assert meta == {
        "target": "product",
        "n": 3,
        "N": 1.0,
        "low": 10.0,
        "high": 100.0,
        "seed": 8,
        "samples": 50,
    }

    loaded = Dataset.load(path)
    assert loaded.meta == data.meta
    assert (loaded.x == data.x).all()
    assert (loaded.y == data.y).all()

    path.with_suffix(".json").unlink()
    with raises(ConfigError):
        Dataset.load(path)


def test_trial_result() -> None:

    target = TargetFunction.product(2)
    ok = TrialResult(
        ("relu", "linear"),
        target,
        (3.0, 2.0, 1.5),
        EvalReport(("relu", "linear"), target, 4.0, 12.5),
    )
    assert not ok.diverged
    assert ok.final_train_loss == 1.5
    assert ok.label == "relu_linear"
    assert ok.sort_key == ("relu", "linear", target)

    bad = TrialResult(
        ("linear", "linear"),
        target,
        (3.0, inf),
        EvalReport.diverged_for(("linear", "linear"), target),
    )
    assert bad.diverged
    assert bad.final_train_loss == inf
    assert bad.report.test_pct_err == inf

    with raises(AssertionError):
        EvalReport(("relu", "linear"), target, -1.0, 1.0)
