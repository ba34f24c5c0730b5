"""
Result files of a sweep:

    results.csv      one row per trial
    loss_curves.csv  one row per (trial, epoch)
    top_curves.csv   the loss curves of the proposed pair and the best
                     baselines by final training loss, per target
    table1.md        per-target summary: the proposed pair's test error and
                     MAE next to the best baseline, plus a training-loss view

`load_results` reads results.csv and loss_curves.csv back, so a report can be
regenerated from a finished sweep directory.
"""
from __future__ import annotations

from collections import defaultdict
from math import isfinite
from pathlib import Path
from typing import Callable, Iterable, Sequence

import pandas as pd

from src.app.sweep import Pair, next_best, rank_results
from src.model.calc_primitives import epochs_to_fraction
from src.model.constants import PROPOSED_LABEL, PROPOSED_PAIR, TOP_CURVES
from src.model.data import EvalReport, TargetFunction, TrialResult
from src.util.format import fmt_metric, fmt_pair, get_logger

LOG = get_logger("report")

KEY_COLUMNS = ["a1", "a2", "target_kind", "n_inputs", "normalizer"]
RESULT_COLUMNS = KEY_COLUMNS + [
    "final_train_loss",
    "test_mae",
    "test_pct_err",
    "diverged",
    "wall_s",
]
CURVE_COLUMNS = KEY_COLUMNS + ["epoch", "loss"]


class ReportError(OSError):
    pass


def _key_fields(res: TrialResult) -> list[object]:
    t = res.target
    return [res.pair[0], res.pair[1], t.kind, t.n_inputs, t.normalizer]


def results_frame(results: Iterable[TrialResult]) -> pd.DataFrame:
    rows = [
        _key_fields(r)
        + [
            r.final_train_loss,
            r.report.test_mae,
            r.report.test_pct_err,
            r.diverged,
            r.wall_s,
        ]
        for r in sorted(results, key=lambda r: r.sort_key)
    ]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)


def curves_frame(results: Iterable[TrialResult]) -> pd.DataFrame:
    rows = [
        _key_fields(r) + [epoch + 1, loss]
        for r in sorted(results, key=lambda r: r.sort_key)
        for epoch, loss in enumerate(r.losses)
    ]
    return pd.DataFrame(rows, columns=CURVE_COLUMNS)


def target_order(t: TargetFunction) -> tuple[bool, str, int, float]:
    return t.kind != "product", t.kind, t.n_inputs, t.normalizer


def _pair_name(pair: Pair) -> str:
    return PROPOSED_LABEL if pair == PROPOSED_PAIR else fmt_pair(*pair)


def top_curve_results(
    results: Sequence[TrialResult], target: TargetFunction, top: int
) -> list[TrialResult]:
    """
    The proposed pair plus the `top` best baselines by final training loss.
    """
    ranked = rank_results(results, target, "final_train_loss")
    baselines = [r for r in ranked if r.pair != PROPOSED_PAIR][:top]
    proposed = [r for r in ranked if r.pair == PROPOSED_PAIR]
    return proposed + baselines


def _md_row(cells: Iterable[str]) -> str:
    return "| " + " | ".join(cells) + " |"


def _fmt_epochs(res: TrialResult) -> str:
    if res.diverged:
        return "-"
    epochs = epochs_to_fraction(res.losses, 0.5)
    return "-" if epochs is None else str(epochs)


def render_table(results: Sequence[TrialResult], top: int = TOP_CURVES) -> str:
    targets = sorted({r.target for r in results}, key=target_order)

    lines = [
        "# Test results on the extrapolation range",
        "",
        _md_row(
            [
                "Expression",
                f"{PROPOSED_LABEL} %_err",
                f"{PROPOSED_LABEL} MAE",
                "Next best pair",
                "Next best %_err",
            ]
        ),
        _md_row(["---"] * 5),
    ]
    for target in targets:
        mine = [
            r for r in results if r.target == target and r.pair == PROPOSED_PAIR
        ]
        other = next_best(results, target, "test_pct_err")
        lines.append(
            _md_row(
                [
                    target.expression,
                    fmt_metric(mine[0].report.test_pct_err).strip()
                    if mine
                    else "-",
                    fmt_metric(mine[0].report.test_mae).strip()
                    if mine
                    else "-",
                    fmt_pair(*other.pair) if other else "-",
                    fmt_metric(other.report.test_pct_err).strip()
                    if other
                    else "-",
                ]
            )
        )

    lines += ["", "# Training loss", ""]
    for target in targets:
        lines += [
            f"## {target.expression}",
            "",
            _md_row(["Pair", "Final train MAE", "Epochs to half loss"]),
            _md_row(["---"] * 3),
        ]
        for res in top_curve_results(results, target, top):
            lines.append(
                _md_row(
                    [
                        _pair_name(res.pair),
                        fmt_metric(res.final_train_loss).strip(),
                        _fmt_epochs(res),
                    ]
                )
            )
        lines.append("")

    return "\n".join(lines) + "\n"


def _write(path: Path, write: Callable[[Path], object]) -> None:
    try:
        write(path)
    except OSError as e:
        raise ReportError(f"Failed to write {path}: {e}") from e
    LOG.info(f"Wrote {path}.")


def report(
    results: Sequence[TrialResult], out_dir: Path, top: int = TOP_CURVES
) -> list[Path]:
    """
    Writes all result files into `out_dir` and returns their paths.
    """
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportError(f"Cannot create {out_dir}: {e}") from e

    paths = [
        out_dir / "results.csv",
        out_dir / "loss_curves.csv",
        out_dir / "top_curves.csv",
        out_dir / "table1.md",
    ]
    top_results = [
        res
        for target in sorted({r.target for r in results}, key=target_order)
        for res in top_curve_results(results, target, top)
    ]

    _write(paths[0], lambda p: results_frame(results).to_csv(p, index=False))
    _write(paths[1], lambda p: curves_frame(results).to_csv(p, index=False))
    _write(
        paths[2], lambda p: curves_frame(top_results).to_csv(p, index=False)
    )
    _write(paths[3], lambda p: p.write_text(render_table(results, top)))
    return paths


def load_results(in_dir: Path) -> list[TrialResult]:
    """
    Rebuilds TrialResults from results.csv and loss_curves.csv.
    """
    res_path = in_dir / "results.csv"
    curve_path = in_dir / "loss_curves.csv"
    try:
        res_df = pd.read_csv(res_path, float_precision="round_trip")
        curve_df = pd.read_csv(curve_path, float_precision="round_trip")
    except OSError as e:
        raise ReportError(f"Cannot read results in {in_dir}: {e}") from e

    if list(res_df.columns) != RESULT_COLUMNS:
        raise ReportError(f"{res_path}: unexpected columns {res_df.columns}")
    if list(curve_df.columns) != CURVE_COLUMNS:
        raise ReportError(f"{curve_path}: unexpected columns")

    curves: defaultdict[tuple[object, ...], list[float]] = defaultdict(list)
    for row in curve_df.sort_values(KEY_COLUMNS + ["epoch"]).itertuples(
        index=False
    ):
        key = (row.a1, row.a2, row.target_kind, row.n_inputs, row.normalizer)
        curves[key].append(float(row.loss))

    out = []
    for row in res_df.itertuples(index=False):
        key = (row.a1, row.a2, row.target_kind, row.n_inputs, row.normalizer)
        target = TargetFunction(
            row.target_kind, int(row.n_inputs), float(row.normalizer)
        )
        pair = (str(row.a1), str(row.a2))
        diverged = bool(row.diverged)
        if diverged:
            ev = EvalReport.diverged_for(pair, target)
        else:
            ev = EvalReport(
                pair, target, float(row.test_mae), float(row.test_pct_err)
            )
        losses = tuple(curves.get(key, []))
        if not diverged and not all(isfinite(v) for v in losses):
            raise ReportError(f"{res_path}: non-finite curve for {key}")
        out.append(TrialResult(pair, target, losses, ev, float(row.wall_s)))
    return sorted(out, key=lambda r: r.sort_key)
