"""
The activation-pair sweep: every pair in a plan is trained on every target,
evaluated on the disjoint test range, and ranked.

Trials are independent. Each one derives its own dataset, initialization and
shuffle seeds from the plan seeds and its (pair, target) key, so the result
set does not depend on how many workers run it or in which order they finish.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor, as_completed
from configparser import ConfigParser
from dataclasses import asdict, dataclass, field, fields, replace
from itertools import product
from logging import Logger
from pathlib import Path
from time import perf_counter
from typing import Any, Iterable, Literal, NamedTuple, Optional

from tqdm import tqdm

from src.guard import ConfigError, Policy
from src.model.calc_primitives import derive_seed
from src.model.constants import (
    BASELINE_ACTIVATIONS,
    DEFAULT_HIDDEN_WIDTH,
    DEFAULT_SAMPLES,
    PROPOSED_PAIR,
    SMOKE_EPOCHS,
    SMOKE_SAMPLES,
    TEST_RANGE,
    TRAIN_RANGE,
)
from src.model.data import Dataset, EvalReport, TargetFunction, TrialResult
from src.model.datagen import generate_cached
from src.model.metrics import evaluate
from src.model.network import Network, NetworkSpec, init_network
from src.model.training import TrainConfig, train
from src.util.format import color, fmt_metric, fmt_pair, get_logger

LOG = get_logger("sweep", col="light_blue")

Pair = tuple[str, str]
RankKey = Literal["final_train_loss", "test_pct_err"]

SMOKE_BASELINES: tuple[Pair, ...] = (
    ("relu", "linear"),
    ("elu", "elu"),
    ("linear", "linear"),
    ("relu", "selu"),
)


class UnknownTargetError(LookupError):
    pass


def default_pairs() -> tuple[Pair, ...]:
    """
    The proposed pair followed by all 121 baseline pairs.
    """
    return (PROPOSED_PAIR,) + tuple(
        product(BASELINE_ACTIVATIONS, BASELINE_ACTIVATIONS)
    )


def default_targets() -> tuple[TargetFunction, ...]:
    """
    The six product targets (raw and normalized, 2-4 inputs) and the complex
    target.
    """
    return tuple(
        TargetFunction.product(n, normalized)
        for n in (2, 3, 4)
        for normalized in (False, True)
    ) + (TargetFunction.complex(),)


@dataclass(frozen=True)
class SweepPlan:

    pairs: tuple[Pair, ...] = field(default_factory=default_pairs)
    targets: tuple[TargetFunction, ...] = field(
        default_factory=default_targets
    )
    train_range: tuple[float, float] = TRAIN_RANGE
    test_range: tuple[float, float] = TEST_RANGE
    train_samples: int = DEFAULT_SAMPLES
    test_samples: int = DEFAULT_SAMPLES
    train: TrainConfig = field(default_factory=TrainConfig)
    hidden1_width: int = DEFAULT_HIDDEN_WIDTH
    hidden2_width: int = DEFAULT_HIDDEN_WIDTH
    data_seed: int = 0
    init_seed: int = 0
    shuffle_seed: int = 0
    jobs: int = 1
    record_wall_time: bool = True

    def __post_init__(self) -> None:
        if not self.pairs or not self.targets:
            raise ConfigError("A plan needs at least one pair and one target.")
        if len(set(self.pairs)) != len(self.pairs):
            raise ConfigError("Duplicate activation pairs in plan.")
        if len(set(self.targets)) != len(self.targets):
            raise ConfigError("Duplicate targets in plan.")
        for lo, hi in (self.train_range, self.test_range):
            if not lo < hi:
                raise ConfigError(f"Empty range [{lo}, {hi})")
        Policy.SAMPLES.validate(self.train_samples)
        Policy.SAMPLES.validate(self.test_samples)
        Policy.JOBS.validate(self.jobs)
        # validates widths and activation names up front
        for a1, a2 in self.pairs:
            NetworkSpec(1, self.hidden1_width, self.hidden2_width, a1, a2)

    @classmethod
    def smoke(cls, **kwargs: Any) -> SweepPlan:
        """
        A small plan for CI: the proposed pair against four baselines, short
        training on fewer samples. Wall times are not recorded, so results.csv
        is byte-identical across job counts.
        """
        kwargs.setdefault("pairs", (PROPOSED_PAIR,) + SMOKE_BASELINES)
        kwargs.setdefault("train_samples", SMOKE_SAMPLES)
        kwargs.setdefault("test_samples", SMOKE_SAMPLES)
        kwargs.setdefault("train", TrainConfig(epochs=SMOKE_EPOCHS))
        kwargs.setdefault("record_wall_time", False)
        return cls(**kwargs)

    @classmethod
    def read_config(cls, cfg: ConfigParser, base: SweepPlan) -> SweepPlan:
        """
        Overrides `base` with the [data], [network], [train] and [sweep]
        sections of an ini file, where present.
        """
        updates: dict[str, Any] = {}
        if cfg.has_section("data"):
            data = cfg["data"]
            for key in ("train_samples", "test_samples", "data_seed"):
                if key in data:
                    updates[key] = data.getint(key)
            for key in ("train_range", "test_range"):
                if key in data:
                    lo, hi = (float(v) for v in data[key].split(","))
                    updates[key] = (lo, hi)
        if cfg.has_section("network"):
            net = cfg["network"]
            for key, name in (
                ("h1", "hidden1_width"),
                ("h2", "hidden2_width"),
                ("init_seed", "init_seed"),
            ):
                if key in net:
                    updates[name] = net.getint(key)
        if cfg.has_section("train"):
            updates["train"] = TrainConfig.read_config(cfg, base.train)
            if "shuffle_seed" in cfg["train"]:
                updates["shuffle_seed"] = cfg["train"].getint("shuffle_seed")
        if cfg.has_section("sweep"):
            sweep = cfg["sweep"]
            if "jobs" in sweep:
                updates["jobs"] = sweep.getint("jobs")
            if "record_wall_time" in sweep:
                updates["record_wall_time"] = sweep.getboolean(
                    "record_wall_time"
                )
        return replace(base, **updates)

    def to_json(self) -> str:
        doc = asdict(self)
        doc["targets"] = [t.spec for t in self.targets]
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, doc: str, base: Optional[SweepPlan] = None) -> SweepPlan:
        """
        Reads a JSON plan mirroring the SweepPlan fields. Missing keys keep the
        values of `base` (the full default plan if not given).
        """
        base = base or cls()
        try:
            raw = json.loads(doc)
            updates: dict[str, Any] = {}
            for f in fields(cls):
                if f.name not in raw:
                    continue
                val = raw[f.name]
                if f.name == "pairs":
                    val = tuple((str(a1), str(a2)) for a1, a2 in val)
                elif f.name == "targets":
                    val = tuple(TargetFunction.parse(t) for t in val)
                elif f.name == "train":
                    val = replace(base.train, **val)
                elif f.name in ("train_range", "test_range"):
                    val = (float(val[0]), float(val[1]))
                updates[f.name] = val
        except (TypeError, ValueError, IndexError) as e:
            raise ConfigError(f"Malformed plan file: {e}") from e
        return replace(base, **updates)

    @classmethod
    def load(cls, path: Path, base: Optional[SweepPlan] = None) -> SweepPlan:
        return cls.from_json(path.read_text(), base)

    def dump_config(self) -> str:
        return (
            f"{len(self.pairs)} pairs x {len(self.targets)} targets, "
            f"{self.train_samples}/{self.test_samples} samples, "
            f"{self.train.epochs} epochs, h={self.hidden1_width}/"
            f"{self.hidden2_width}, seeds={self.data_seed}/{self.init_seed}/"
            f"{self.shuffle_seed}, jobs={self.jobs}"
        )

    @property
    def n_trials(self) -> int:
        return len(self.pairs) * len(self.targets)


def dataset_seeds(data_seed: int, target: TargetFunction) -> tuple[int, int]:
    """
    Train and test seeds for `target`. They depend on the target only, so all
    pairs in a sweep see the same data.
    """
    return (
        derive_seed(data_seed, target.spec, "train"),
        derive_seed(data_seed, target.spec, "test"),
    )


class TrialTask(NamedTuple):
    pair: Pair
    target: TargetFunction
    plan: SweepPlan

    @property
    def data_seeds(self) -> tuple[int, int]:
        return dataset_seeds(self.plan.data_seed, self.target)

    @property
    def init_seed(self) -> int:
        return derive_seed(self.plan.init_seed, *self.pair, self.target.spec)

    @property
    def shuffle_seed(self) -> int:
        return derive_seed(self.plan.shuffle_seed, *self.pair, self.target.spec)

    def datasets(self) -> tuple[Dataset, Dataset]:
        plan = self.plan
        train_seed, test_seed = self.data_seeds
        return (
            generate_cached(
                self.target, *plan.train_range, plan.train_samples, train_seed
            ),
            generate_cached(
                self.target, *plan.test_range, plan.test_samples, test_seed
            ),
        )


def fit_trial(task: TrialTask) -> tuple[Network, TrialResult]:
    """
    Trains and evaluates one (pair, target), returning the trained network
    with its result. Divergence is recorded in the result; other errors
    propagate.
    """
    start = perf_counter()
    plan = task.plan
    train_data, test_data = task.datasets()
    net = init_network(
        NetworkSpec(
            input_width=task.target.n_inputs,
            hidden1_width=plan.hidden1_width,
            hidden2_width=plan.hidden2_width,
            a1=task.pair[0],
            a2=task.pair[1],
            init_seed=task.init_seed,
        )
    )
    cfg = replace(plan.train, shuffle_seed=task.shuffle_seed)
    outcome = train(net, train_data, cfg)
    if outcome.diverged:
        report = EvalReport.diverged_for(task.pair, task.target)
    else:
        report = evaluate(net, test_data)

    wall = perf_counter() - start if plan.record_wall_time else 0.0
    return net, TrialResult(
        task.pair, task.target, outcome.losses, report, wall
    )


def run_trial(task: TrialTask) -> TrialResult:
    """
    As fit_trial, but never raises: any failure inside the trial is recorded
    as a diverged result.
    """
    try:
        return fit_trial(task)[1]
    except Exception as e:
        LOG.critical(
            f"Uncaught exception {e!r} in trial "
            f"{fmt_pair(*task.pair)} / {task.target}"
        )
        report = EvalReport.diverged_for(task.pair, task.target)
        return TrialResult(task.pair, task.target, (), report, 0.0)


def plan_tasks(plan: SweepPlan) -> list[TrialTask]:
    return [
        TrialTask(pair, target, plan)
        for target in plan.targets
        for pair in plan.pairs
    ]


def _log_trial(log: Logger, res: TrialResult) -> None:
    msg = (
        f"{fmt_pair(*res.pair):<26s} {str(res.target):<20s} "
        f"loss={fmt_metric(res.final_train_loss)} "
        f"%err={fmt_metric(res.report.test_pct_err)} "
        f"({res.wall_s:.1f}s)"
    )
    if res.diverged:
        msg = color("red", msg)
    elif res.pair == PROPOSED_PAIR:
        msg = color("green", msg)
    log.info(msg)


def run_sweep(
    plan: SweepPlan, log: Optional[Logger] = None, progress: bool = True
) -> list[TrialResult]:
    """
    Runs every trial of the plan on a pool of `plan.jobs` worker processes
    (inline when jobs == 1) and returns the results sorted by
    (a1, a2, target).
    """
    log = log or LOG
    tasks = plan_tasks(plan)
    log.info(f"Sweep: {plan.dump_config()}")

    results: list[TrialResult] = []
    bar = tqdm(total=plan.n_trials, disable=not progress, unit="trial")
    try:
        if plan.jobs == 1:
            for task in tasks:
                results.append(res := run_trial(task))
                _log_trial(log, res)
                bar.update()
        else:
            with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
                futures = [pool.submit(run_trial, task) for task in tasks]
                for fut in as_completed(futures):
                    results.append(res := fut.result())
                    _log_trial(log, res)
                    bar.update()
    finally:
        bar.close()

    n_div = sum(r.diverged for r in results)
    log.info(f"Sweep done: {len(results)} trials, {n_div} diverged.")
    return sorted(results, key=lambda r: r.sort_key)


def _rank_value(res: TrialResult, key: RankKey) -> float:
    if key == "final_train_loss":
        return res.final_train_loss
    elif key == "test_pct_err":
        return res.report.test_pct_err
    raise ValueError(key)


def rank_results(
    results: Iterable[TrialResult], target: TargetFunction, key: RankKey
) -> list[TrialResult]:
    """
    Results for `target`, ascending by `key`; diverged trials last, ties broken
    by pair name.
    """
    for_target = [r for r in results if r.target == target]
    if not for_target:
        raise UnknownTargetError(str(target))
    return sorted(
        for_target,
        key=lambda r: (r.diverged, _rank_value(r, key), r.label),
    )


def next_best(
    results: Iterable[TrialResult], target: TargetFunction, key: RankKey
) -> Optional[TrialResult]:
    """
    The best-ranked result for `target` that is not the proposed pair.
    """
    for res in rank_results(results, target, key):
        if res.pair != PROPOSED_PAIR:
            return res
    return None
