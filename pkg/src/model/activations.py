"""
Activation functions with exact first derivatives.

Every function here is written against numpy so that it accepts a python float
as well as a Matrix; the `Activation` records tie a value map to its derivative
under the canonical lowercase name used on the command line and in result
files.
"""
from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable

import numpy as np

from src.guard import Policy
from src.model import tensor as tn
from src.model.constants import (
    BASELINE_ACTIVATIONS,
    ELU_ALPHA,
    HARD_SIGMOID_SHIFT,
    HARD_SIGMOID_SLOPE,
    PROPOSED_PAIR,
    SELU_ALPHA,
    SELU_SCALE,
)
from src.model.tensor import Matrix, ShapeError

Fn = Callable[[Matrix], Matrix]


class UnknownActivationError(KeyError):
    pass


@dataclass(frozen=True)
class Activation:
    """
    A named activation.

    For vector-valued activations (softmax) `value` maps each row to a row, and
    `derivative` only gives the diagonal of the per-row Jacobian; backward
    passes must go through `activation_jacobian_apply`.

    `seams` lists the points where the derivative is discontinuous or
    conventionally chosen.
    """

    name: str
    value: Fn
    derivative: Fn
    is_vector_valued: bool = False
    seams: tuple[float, ...] = ()

    def __str__(self) -> str:
        return f"Activation({self.name})"


def symlog(x: Matrix) -> Matrix:
    """
    log(x + 1) for x >= 0 and -log(1 - x) for x < 0.

    Written as sign(x) * log1p(|x|), which makes the odd symmetry exact.
    """
    return np.sign(x) * np.log1p(np.abs(x))  # type: ignore


def symlog_deriv(x: Matrix) -> Matrix:
    return 1.0 / (1.0 + np.abs(x))  # type: ignore


def _check_symexp_arg(x: Matrix) -> None:
    if np.size(x) > 0:
        Policy.SYMEXP_ARG.validate(float(np.max(np.abs(x))))


def symexp(x: Matrix) -> Matrix:
    """
    e^x - 1 for x >= 0 and 1 - e^-x for x < 0; the inverse of symlog.

    Raises DivergenceFault when |x| > 700.
    """
    _check_symexp_arg(x)
    return np.sign(x) * np.expm1(np.abs(x))  # type: ignore


def symexp_deriv(x: Matrix) -> Matrix:
    _check_symexp_arg(x)
    return np.exp(np.abs(x))  # type: ignore


def _sigmoid(x: Matrix) -> Matrix:
    # tanh form does not overflow for large |x|
    return 0.5 * (1.0 + np.tanh(0.5 * x))  # type: ignore


def _sigmoid_deriv(x: Matrix) -> Matrix:
    s = _sigmoid(x)
    return s * (1.0 - s)  # type: ignore


def _elu(x: Matrix) -> Matrix:
    return np.where(x > 0, x, ELU_ALPHA * np.expm1(np.minimum(x, 0.0)))


def _elu_deriv(x: Matrix) -> Matrix:
    return np.where(x > 0, 1.0, ELU_ALPHA * np.exp(np.minimum(x, 0.0)))


def _selu(x: Matrix) -> Matrix:
    return SELU_SCALE * np.where(  # type: ignore
        x > 0, x, SELU_ALPHA * np.expm1(np.minimum(x, 0.0))
    )


def _selu_deriv(x: Matrix) -> Matrix:
    return SELU_SCALE * np.where(  # type: ignore
        x > 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0))
    )


def _hard_sigmoid(x: Matrix) -> Matrix:
    return np.clip(HARD_SIGMOID_SLOPE * x + HARD_SIGMOID_SHIFT, 0.0, 1.0)


_HARD_SIGMOID_EDGE = HARD_SIGMOID_SHIFT / HARD_SIGMOID_SLOPE


def _hard_sigmoid_deriv(x: Matrix) -> Matrix:
    # zero at the clip boundaries themselves
    return np.where(np.abs(x) < _HARD_SIGMOID_EDGE, HARD_SIGMOID_SLOPE, 0.0)


def _relu(x: Matrix) -> Matrix:
    return np.maximum(x, 0.0)


def _relu_deriv(x: Matrix) -> Matrix:
    return np.where(x > 0, 1.0, 0.0)


def _linear(x: Matrix) -> Matrix:
    return x + 0.0  # type: ignore


def _linear_deriv(x: Matrix) -> Matrix:
    return np.ones_like(x, dtype=np.float64)


def _softplus(x: Matrix) -> Matrix:
    return np.logaddexp(0.0, x)  # type: ignore


def _softsign(x: Matrix) -> Matrix:
    return x / (1.0 + np.abs(x))  # type: ignore


def _softsign_deriv(x: Matrix) -> Matrix:
    return 1.0 / np.square(1.0 + np.abs(x))  # type: ignore


def _swish(x: Matrix) -> Matrix:
    return x * _sigmoid(x)  # type: ignore


def _swish_deriv(x: Matrix) -> Matrix:
    s = _sigmoid(x)
    return s + x * s * (1.0 - s)  # type: ignore


def _tanh(x: Matrix) -> Matrix:
    return np.tanh(x)  # type: ignore


def _tanh_deriv(x: Matrix) -> Matrix:
    return 1.0 - np.square(np.tanh(x))  # type: ignore


def _softmax(x: Matrix) -> Matrix:
    e = np.exp(x - np.max(x, axis=-1, keepdims=True))
    return e / np.sum(e, axis=-1, keepdims=True)  # type: ignore


def _softmax_diag(x: Matrix) -> Matrix:
    s = _softmax(x)
    return s * (1.0 - s)  # type: ignore


ACTIVATIONS: MappingProxyType[str, Activation] = MappingProxyType(
    {
        act.name: act
        for act in (
            Activation("elu", _elu, _elu_deriv, seams=(0.0,)),
            Activation(
                "hard_sigmoid",
                _hard_sigmoid,
                _hard_sigmoid_deriv,
                seams=(-_HARD_SIGMOID_EDGE, _HARD_SIGMOID_EDGE),
            ),
            Activation("linear", _linear, _linear_deriv),
            Activation("relu", _relu, _relu_deriv, seams=(0.0,)),
            Activation("selu", _selu, _selu_deriv, seams=(0.0,)),
            Activation("sigmoid", _sigmoid, _sigmoid_deriv),
            Activation(
                "softmax", _softmax, _softmax_diag, is_vector_valued=True
            ),
            Activation("softplus", _softplus, _sigmoid),
            Activation("softsign", _softsign, _softsign_deriv),
            Activation("swish", _swish, _swish_deriv),
            Activation("tanh", _tanh, _tanh_deriv),
            Activation("symlog", symlog, symlog_deriv, seams=(0.0,)),
            Activation("symexp", symexp, symexp_deriv, seams=(0.0,)),
        )
    }
)

assert set(BASELINE_ACTIVATIONS) | set(PROPOSED_PAIR) == set(ACTIVATIONS)


def baseline_activation(name: str) -> Activation:
    """
    One of the eleven comparison activations, with the default constants of
    the common deep-learning frameworks.
    """
    if name not in BASELINE_ACTIVATIONS:
        raise UnknownActivationError(name)
    return ACTIVATIONS[name]


def get_activation(name: str) -> Activation:
    """
    Any registered activation, the symmetric pair included.
    """
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise UnknownActivationError(name) from None


def apply_activation(a: Activation, z: Matrix) -> Matrix:
    return tn.elementwise_map(z, a.value)


def activation_jacobian_apply(
    a: Activation, z: Matrix, upstream: Matrix
) -> Matrix:
    """
    Pulls `upstream` (dL/dA(z)) back through the activation to dL/dz.

    Elementwise activations multiply by the derivative. Softmax applies the
    per-row Jacobian diag(s) - s sᵀ, which is symmetric, so the product is
    s ⊙ (u - <u, s>).
    """
    if z.shape != upstream.shape:
        raise ShapeError(
            f"jacobian_apply: z {z.shape} vs upstream {upstream.shape}"
        )
    if a.is_vector_valued:
        s = a.value(z)
        inner = np.sum(upstream * s, axis=1, keepdims=True)
        return tn.elementwise_map(z, lambda _: s * (upstream - inner))
    return tn.elementwise_mul(upstream, tn.elementwise_map(z, a.derivative))
