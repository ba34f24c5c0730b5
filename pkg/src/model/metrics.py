from __future__ import annotations

import numpy as np

from src.guard import DivergenceFault
from src.model.data import Dataset, EvalReport
from src.model.network import Network, predict
from src.model.tensor import Matrix, ShapeError
from src.model.training import mae_loss


class UndefinedMetricError(ArithmeticError):
    pass


def percent_error(pred: Matrix, actual: Matrix) -> float:
    """
    (100 / n) Σ |pred - actual| / |actual|.
    """
    if pred.shape != actual.shape or pred.size == 0:
        raise ShapeError(f"percent_error: {pred.shape} vs {actual.shape}")
    if (actual == 0).any():
        raise UndefinedMetricError("percent error with a zero actual value")
    return float(100.0 * np.mean(np.abs(pred - actual) / np.abs(actual)))


def evaluate(net: Network, test: Dataset) -> EvalReport:
    """
    Test metrics from one full-batch forward pass. A non-finite prediction
    yields a diverged report with +inf metrics.
    """
    pair = net.spec.pair
    if test.n_inputs != net.spec.input_width:
        raise ShapeError(
            f"test data has {test.n_inputs} inputs, net expects "
            f"{net.spec.input_width}"
        )
    try:
        yhat = predict(net, test.x)
    except DivergenceFault:
        return EvalReport.diverged_for(pair, test.meta.target)

    mae = mae_loss(yhat, test.y)
    pct = percent_error(yhat, test.y)
    if not (np.isfinite(mae) and np.isfinite(pct)):
        return EvalReport.diverged_for(pair, test.meta.target)
    return EvalReport(pair, test.meta.target, mae, pct)
