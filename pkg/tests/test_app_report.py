from math import inf
from pathlib import Path

import pandas as pd
from pytest import raises

from src.app.report import (
    CURVE_COLUMNS,
    RESULT_COLUMNS,
    ReportError,
    load_results,
    render_table,
    report,
    top_curve_results,
)
from src.model.constants import PROPOSED_PAIR
from src.model.data import EvalReport, TargetFunction, TrialResult

T2 = TargetFunction.product(2, normalized=True)
CX = TargetFunction.complex()


def _result(
    pair: tuple[str, str], target: TargetFunction, pct: float, final: float
) -> TrialResult:
    if pct == inf:
        ev = EvalReport.diverged_for(pair, target)
        return TrialResult(pair, target, (final, inf), ev, 0.5)
    ev = EvalReport(pair, target, pct / 2, pct)
    return TrialResult(pair, target, (4 * final, 2 * final, final), ev, 0.5)


def _results() -> list[TrialResult]:
    out = []
    for target in (CX, T2):
        out += [
            _result(PROPOSED_PAIR, target, 7.8, 1.0),
            _result(("relu", "linear"), target, 69.29, 3.0),
            _result(("elu", "elu"), target, 80.0, 2.0),
            _result(("linear", "linear"), target, inf, 5.0),
        ]
    return out


def test_report_files(tmp_path: Path) -> None:

    results = _results()
    paths = report(results, tmp_path)
    assert [p.name for p in paths] == [
        "results.csv",
        "loss_curves.csv",
        "top_curves.csv",
        "table1.md",
    ]

    df = pd.read_csv(tmp_path / "results.csv")
    assert list(df.columns) == RESULT_COLUMNS
    assert len(df) == 8
    assert list(df["a1"]) == sorted(df["a1"])
    assert df["diverged"].sum() == 2

    curves = pd.read_csv(tmp_path / "loss_curves.csv")
    assert list(curves.columns) == CURVE_COLUMNS
    assert len(curves) == sum(len(r.losses) for r in results)
    assert curves["epoch"].min() == 1

    top = pd.read_csv(tmp_path / "top_curves.csv")
    assert len(top) == len(curves)


def test_empty_report(tmp_path: Path) -> None:

    report([], tmp_path)
    assert (tmp_path / "results.csv").read_text().strip() == ",".join(
        RESULT_COLUMNS
    )
    assert (tmp_path / "loss_curves.csv").read_text().strip() == ",".join(
        CURVE_COLUMNS
    )
    assert load_results(tmp_path) == []


def test_table() -> None:

    table = render_table(_results())
    lines = table.splitlines()

    rows = [ln for ln in lines if ln.startswith("| x1x2/10 ")]
    assert len(rows) == 1
    assert "7.8000" in rows[0]
    assert "relu_linear" in rows[0]
    assert "69.2900" in rows[0]

    # products come before the complex target
    assert table.index("x1x2/10") < table.index("x1(x2+x3)+x4")
    assert "## x1x2/10" in table
    assert "| lg_model |" in table


def test_top_curves() -> None:

    top = top_curve_results(_results(), T2, 2)
    assert [r.label for r in top] == [
        "symlog_symexp",
        "elu_elu",
        "relu_linear",
    ]
    top = top_curve_results(_results(), T2, 7)
    assert len(top) == 4
    assert top[-1].diverged


def test_load_results(tmp_path: Path) -> None:

    results = _results()
    report(results, tmp_path)
    loaded = load_results(tmp_path)
    assert loaded == sorted(results, key=lambda r: r.sort_key)

    # regenerating from the loaded results is stable
    other = tmp_path / "again"
    report(loaded, other)
    for name in ("results.csv", "loss_curves.csv", "table1.md"):
        assert (other / name).read_text() == (tmp_path / name).read_text()


def test_report_errors(tmp_path: Path) -> None:

    blocker = tmp_path / "file"
    blocker.write_text("")
    with raises(ReportError):
        report(_results(), blocker)
    with raises(ReportError):
        load_results(tmp_path / "missing")

    (tmp_path / "results.csv").write_text("a,b\n1,2\n")
    (tmp_path / "loss_curves.csv").write_text(",".join(CURVE_COLUMNS) + "\n")
    with raises(ReportError):
        load_results(tmp_path)
