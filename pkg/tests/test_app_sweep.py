from configparser import ConfigParser
from math import inf
from pathlib import Path
from typing import Any

from pytest import MonkeyPatch, raises

from src.app import sweep
from src.app.sweep import (
    SweepPlan,
    TrialTask,
    UnknownTargetError,
    default_pairs,
    default_targets,
    next_best,
    rank_results,
    run_sweep,
    run_trial,
)
from src.guard import ConfigError
from src.model.constants import PROPOSED_PAIR
from src.model.data import EvalReport, TargetFunction, TrialResult
from src.model.training import TrainConfig

T2 = TargetFunction.product(2, normalized=True)


def _tiny_plan(**kwargs: Any) -> SweepPlan:
    kwargs.setdefault("pairs", (PROPOSED_PAIR, ("relu", "linear")))
    kwargs.setdefault("targets", (T2,))
    return SweepPlan(
        train_samples=100,
        test_samples=100,
        train=TrainConfig(epochs=2),
        record_wall_time=False,
        **kwargs,
    )


def _result(
    pair: tuple[str, str], pct: float, loss: float = 1.0
) -> TrialResult:
    if pct == inf:
        return TrialResult(
            pair, T2, (loss, inf), EvalReport.diverged_for(pair, T2)
        )
    report = EvalReport(pair, T2, 1.0, pct)
    return TrialResult(pair, T2, (2 * loss, loss), report)


def test_default_plan() -> None:

    pairs = default_pairs()
    assert len(pairs) == 122
    assert len(set(pairs)) == 122
    assert pairs[0] == PROPOSED_PAIR
    assert ("softmax", "softmax") in pairs

    targets = default_targets()
    assert len(targets) == 7
    assert TargetFunction.complex() in targets
    assert TargetFunction("product", 4, 1000.0) in targets

    assert SweepPlan().n_trials == 854

    smoke = SweepPlan.smoke()
    assert smoke.pairs[0] == PROPOSED_PAIR
    assert ("relu", "linear") in smoke.pairs
    assert ("relu", "selu") in smoke.pairs
    assert smoke.train.epochs == 20
    assert smoke.train_samples == smoke.test_samples == 2000
    assert not smoke.record_wall_time
    assert SweepPlan().record_wall_time


def test_plan_validation() -> None:

    with raises(ConfigError):
        SweepPlan(pairs=())
    with raises(ConfigError):
        SweepPlan(pairs=(PROPOSED_PAIR, PROPOSED_PAIR))
    with raises(ConfigError):
        SweepPlan(train_range=(100.0, 10.0))
    with raises(ConfigError):
        SweepPlan(jobs=0)
    with raises(KeyError):
        SweepPlan(pairs=(("relu", "gelu"),))


def test_plan_config_and_json(tmp_path: Path) -> None:

    cp = ConfigParser()
    cp.read_string(
        "[data]\ntrain_samples = 500\ntest_range = 200,300\n"
        "[network]\nh1 = 4\n"
        "[train]\nepochs = 7\nshuffle_seed = 5\n"
        "[sweep]\njobs = 3\nrecord_wall_time = false\n"
    )
    plan = SweepPlan.read_config(cp, SweepPlan.smoke())
    assert plan.train_samples == 500
    assert plan.test_samples == 2000
    assert plan.test_range == (200.0, 300.0)
    assert plan.hidden1_width == 4
    assert plan.train.epochs == 7
    assert plan.shuffle_seed == 5
    assert plan.jobs == 3
    assert not plan.record_wall_time
    assert len(plan.pairs) == 5

    path = tmp_path / "plan.json"
    path.write_text(plan.to_json())
    assert SweepPlan.load(path) == plan

    partial = SweepPlan.from_json(
        '{"targets": ["quotient"], "train": {"epochs": 3}}', plan
    )
    assert partial.targets == (TargetFunction.quotient(),)
    assert partial.train.epochs == 3
    assert partial.train.shuffle_seed == plan.train.shuffle_seed

    for bad in ('{"pairs": [["relu"]]}', '{"targets": ["sum"]}', "[1"):
        with raises(ConfigError):
            SweepPlan.from_json(bad)


def test_trial_seeds() -> None:

    plan = _tiny_plan()
    a = TrialTask(PROPOSED_PAIR, T2, plan)
    b = TrialTask(("relu", "linear"), T2, plan)

    # every pair sees the same data for a target
    assert a.data_seeds == b.data_seeds
    assert a.data_seeds[0] != a.data_seeds[1]
    assert a.init_seed != b.init_seed
    assert a.shuffle_seed != b.shuffle_seed


def test_run_trial_never_raises(monkeypatch: MonkeyPatch) -> None:
    def boom(*args: Any, **kwargs: Any) -> None:
        raise RuntimeError("boom")

    monkeypatch.setattr(sweep, "train", boom)
    res = run_trial(TrialTask(PROPOSED_PAIR, T2, _tiny_plan()))
    assert res.diverged
    assert res.losses == ()
    assert res.report.test_pct_err == inf


def test_sweep_is_deterministic_across_jobs() -> None:

    serial = run_sweep(_tiny_plan(jobs=1), progress=False)
    parallel = run_sweep(_tiny_plan(jobs=2), progress=False)

    assert len(serial) == 2
    assert serial == parallel
    assert [r.sort_key for r in serial] == sorted(r.sort_key for r in serial)
    for res in serial:
        assert res.wall_s == 0.0
        assert len(res.losses) <= 2


def test_ranking() -> None:

    results = [
        _result(("relu", "linear"), 10.0, loss=3.0),
        _result(("elu", "elu"), inf),
        _result(PROPOSED_PAIR, 5.0, loss=2.0),
        _result(("linear", "linear"), 10.0, loss=1.0),
    ]

    by_err = rank_results(results, T2, "test_pct_err")
    assert [r.label for r in by_err] == [
        "symlog_symexp",
        "linear_linear",
        "relu_linear",
        "elu_elu",
    ]
    by_loss = rank_results(results, T2, "final_train_loss")
    assert by_loss[0].label == "linear_linear"
    assert by_loss[-1].label == "elu_elu"

    best = next_best(results, T2, "test_pct_err")
    assert best is not None and best.label == "linear_linear"
    assert next_best(results[2:3], T2, "test_pct_err") is None

    with raises(UnknownTargetError):
        rank_results(results, TargetFunction.complex(), "test_pct_err")
