"""
The `mulnet` command line.

    mulnet gen-data --target product:n=2,N=10 [--out DIR] [--bins B]
    mulnet train --a1 symlog --a2 symexp --target complex [--save net.json]
    mulnet eval --model net.json --data test.csv
    mulnet sweep [--smoke] [--jobs K] [--out DIR] [--plan plan.json]
    mulnet report --in DIR

Settings are layered: dataclass defaults, then the ini file, then a JSON plan
(sweep only), then flags.
"""
from __future__ import annotations

import sys
from argparse import ArgumentParser, Namespace
from dataclasses import replace
from logging import DEBUG
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from src import config, out_fn
from src.app.report import load_results, report
from src.app.sweep import (
    SweepPlan,
    TrialTask,
    dataset_seeds,
    fit_trial,
    run_sweep,
)
from src.guard import ConfigError
from src.model.constants import PROPOSED_PAIR
from src.model.data import Dataset, TargetFunction
from src.model.datagen import generate, histogram
from src.model.metrics import evaluate
from src.model.network import Network, handset_product_network
from src.model.tensor import ShapeError
from src.util.format import color, fmt_metric, fmt_pair, get_logger, set_level

LOG = get_logger("mulnet", col="light_blue")

DEFAULT_BINS = 20
HANDSET_MODEL = "handset"


def _common_flags() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="ini file")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("--seed-data", type=int, default=None)
    common.add_argument("--seed-init", type=int, default=None)
    common.add_argument("--seed-shuffle", type=int, default=None)
    common.add_argument("--epochs", type=int, default=None)
    common.add_argument("--batch", type=int, default=None)
    common.add_argument("--lr", type=float, default=None)
    common.add_argument("--h1", type=int, default=None)
    common.add_argument("--h2", type=int, default=None)
    common.add_argument(
        "--samples",
        type=int,
        default=None,
        help="sample count of both the train and the test set",
    )
    return common


def build_parser() -> ArgumentParser:
    common = _common_flags()
    parser = ArgumentParser(
        prog="mulnet",
        description="Multiplication-learning networks with symlog/symexp "
        "activations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", parents=[common])
    gen.add_argument("--target", type=str, default="product:n=2,N=10")
    gen.add_argument("--out", type=Path, default=None)
    gen.add_argument("--bins", type=int, default=None)

    tr = sub.add_parser("train", parents=[common])
    tr.add_argument("--a1", type=str, default=PROPOSED_PAIR[0])
    tr.add_argument("--a2", type=str, default=PROPOSED_PAIR[1])
    tr.add_argument("--target", type=str, required=True)
    tr.add_argument("--save", type=Path, default=None)

    ev = sub.add_parser("eval", parents=[common])
    ev.add_argument(
        "--model",
        type=str,
        required=True,
        help=f"network JSON, or '{HANDSET_MODEL}' for the hand-set product "
        "network",
    )
    ev.add_argument("--data", type=Path, required=True)

    sw = sub.add_parser("sweep", parents=[common])
    sw.add_argument(
        "--smoke",
        action="store_true",
        help="five pairs, 2000 samples, 20 epochs, no wall times",
    )
    sw.add_argument("--jobs", type=int, default=None)
    sw.add_argument("--out", type=Path, default=None)
    sw.add_argument("--plan", type=Path, default=None)
    sw.add_argument(
        "--no-wall-time",
        action="store_true",
        help="write wall_s as 0.0 so results.csv is reproducible",
    )
    sw.add_argument("--no-progress", action="store_true")

    rp = sub.add_parser("report", parents=[common])
    rp.add_argument("--in", dest="in_dir", type=Path, required=True)
    rp.add_argument("--out", type=Path, default=None)

    return parser


def apply_flags(plan: SweepPlan, args: Namespace) -> SweepPlan:
    """
    Overrides plan settings with whichever global flags were given.
    """
    updates: dict[str, Any] = {}
    train_updates: dict[str, Any] = {}
    for flag, name in (
        ("seed_data", "data_seed"),
        ("seed_init", "init_seed"),
        ("seed_shuffle", "shuffle_seed"),
        ("h1", "hidden1_width"),
        ("h2", "hidden2_width"),
    ):
        if (val := getattr(args, flag)) is not None:
            updates[name] = val
    if args.samples is not None:
        updates["train_samples"] = updates["test_samples"] = args.samples
    for flag, name in (
        ("epochs", "epochs"),
        ("batch", "batch_size"),
        ("lr", "learning_rate"),
    ):
        if (val := getattr(args, flag)) is not None:
            train_updates[name] = val
    if train_updates:
        updates["train"] = replace(plan.train, **train_updates)
    if getattr(args, "jobs", None) is not None:
        updates["jobs"] = args.jobs
    if getattr(args, "no_wall_time", False):
        updates["record_wall_time"] = False
    return replace(plan, **updates)


def resolve_plan(
    args: Namespace, base: Optional[SweepPlan] = None
) -> SweepPlan:
    plan = SweepPlan.read_config(config(args.config), base or SweepPlan())
    if getattr(args, "plan", None) is not None:
        plan = SweepPlan.load(args.plan, plan)
    return apply_flags(plan, args)


def _sweep_out_dir(args: Namespace) -> Path:
    if args.out is not None:
        return Path(args.out)
    cfg = config(args.config)
    if cfg.has_section("sweep") and "out_dir" in cfg["sweep"]:
        return Path(cfg["sweep"]["out_dir"])
    return out_fn("sweep")


def cmd_gen_data(args: Namespace) -> None:
    target = TargetFunction.parse(args.target)
    plan = resolve_plan(args)
    out_dir = args.out or out_fn("data")
    cfg = config(args.config)
    bins = args.bins
    if bins is None:
        bins = (
            cfg["data"].getint("bins", DEFAULT_BINS)
            if cfg.has_section("data")
            else DEFAULT_BINS
        )

    train_seed, test_seed = dataset_seeds(plan.data_seed, target)
    for stem, (low, high), samples, seed in (
        ("train", plan.train_range, plan.train_samples, train_seed),
        ("test", plan.test_range, plan.test_samples, test_seed),
    ):
        data = generate(target, low, high, samples, seed)
        data.save(out_dir / f"{stem}.csv")
        histogram(data, bins).to_frame().to_csv(
            out_dir / f"hist_{stem}.csv", index=False
        )
        LOG.info(
            f"{stem}: {samples} samples of {target.expression} on "
            f"[{low:g}, {high:g}) -> {out_dir / f'{stem}.csv'}"
        )


def cmd_train(args: Namespace) -> None:
    target = TargetFunction.parse(args.target)
    plan = resolve_plan(args)
    task = TrialTask((args.a1, args.a2), target, plan)
    net, res = fit_trial(task)

    LOG.info(
        f"{fmt_pair(*res.pair)} on {target.expression}: "
        f"train MAE={fmt_metric(res.final_train_loss).strip()} "
        f"test MAE={fmt_metric(res.report.test_mae).strip()} "
        f"%err={fmt_metric(res.report.test_pct_err).strip()}"
    )
    if res.diverged:
        LOG.warning(color("red", "Training diverged."))
    if args.save is not None:
        net.save(args.save)
        LOG.info(f"Saved network to {args.save}.")


def cmd_eval(args: Namespace) -> None:
    if args.model == HANDSET_MODEL:
        net = handset_product_network()
    else:
        net = Network.load(Path(args.model))
    data = Dataset.load(args.data)
    ev = evaluate(net, data)
    LOG.info(
        f"{fmt_pair(*net.spec.pair)} on {data.meta.target.expression} "
        f"({len(data)} samples): MAE={fmt_metric(ev.test_mae).strip()} "
        f"%err={fmt_metric(ev.test_pct_err).strip()}"
    )


def cmd_sweep(args: Namespace) -> None:
    base = SweepPlan.smoke() if args.smoke else SweepPlan()
    plan = resolve_plan(args, base)
    out_dir = _sweep_out_dir(args)
    results = run_sweep(plan, progress=not args.no_progress)
    report(results, out_dir)


def cmd_report(args: Namespace) -> None:
    results = load_results(args.in_dir)
    report(results, args.out or args.in_dir)


COMMANDS: dict[str, Callable[[Namespace], None]] = {
    "gen-data": cmd_gen_data,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_level(DEBUG)
    try:
        COMMANDS[args.command](args)
    except (ConfigError, ShapeError, LookupError) as e:
        LOG.error(f"{e}")
        return 2
    except OSError as e:
        LOG.error(f"{e}")
        return 1
    return 0


def mulnet_entrypoint() -> None:
    sys.exit(main())
