"""
Minimal dense linear algebra on float64 numpy arrays.

A Matrix is a 2-D, C-ordered, float64 array with one sample per row. Every
operation here checks shapes, returns a fresh read-only array, and refuses to
hand out non-finite entries. Row vectors (biases, column sums) are 1-D arrays.
"""
from __future__ import annotations

from typing import Callable

import numpy as np
import numpy.typing as npt

from src.guard import assert_finite

Matrix = npt.NDArray[np.float64]
Vector = npt.NDArray[np.float64]


class ShapeError(ValueError):
    pass


def _freeze(arr: Matrix, op: str) -> Matrix:
    assert_finite(arr, op)
    arr.flags.writeable = False
    return arr


def as_matrix(data: npt.ArrayLike) -> Matrix:
    """
    Copies `data` into a new Matrix. 1-D input becomes a single row.
    """
    arr = np.array(data, dtype=np.float64, order="C", ndmin=2)
    if arr.ndim != 2:
        raise ShapeError(f"expected 2-D data, got {arr.ndim}-D")
    return _freeze(arr, "as_matrix")


def as_vector(data: npt.ArrayLike) -> Vector:
    arr = np.array(data, dtype=np.float64, order="C")
    if arr.ndim != 1:
        raise ShapeError(f"expected 1-D data, got {arr.ndim}-D")
    return _freeze(arr, "as_vector")


def _check_2d(m: Matrix, op: str) -> None:
    if m.ndim != 2:
        raise ShapeError(f"{op}: expected a matrix, got shape {m.shape}")


def _check_same(a: Matrix, b: Matrix, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


def matmul(a: Matrix, b: Matrix) -> Matrix:
    _check_2d(a, "matmul")
    _check_2d(b, "matmul")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} x {b.shape}")
    return _freeze(a @ b, "matmul")


def add_row_broadcast(m: Matrix, bias: Vector) -> Matrix:
    _check_2d(m, "add_row_broadcast")
    if bias.shape != (m.shape[1],):
        raise ShapeError(
            f"add_row_broadcast: bias {bias.shape} vs {m.shape[1]} columns"
        )
    return _freeze(m + bias, "add_row_broadcast")


def transpose(m: Matrix) -> Matrix:
    _check_2d(m, "transpose")
    return _freeze(np.ascontiguousarray(m.T), "transpose")


def elementwise_map(m: Matrix, f: Callable[[Matrix], Matrix]) -> Matrix:
    _check_2d(m, "elementwise_map")
    out = np.asarray(f(m), dtype=np.float64)
    if out.shape != m.shape:
        raise ShapeError(f"elementwise_map: {m.shape} -> {out.shape}")
    return _freeze(np.array(out), "elementwise_map")


def elementwise_mul(a: Matrix, b: Matrix) -> Matrix:
    _check_same(a, b, "elementwise_mul")
    return _freeze(a * b, "elementwise_mul")


def add(a: Matrix, b: Matrix) -> Matrix:
    _check_same(a, b, "add")
    return _freeze(a + b, "add")


def sub(a: Matrix, b: Matrix) -> Matrix:
    _check_same(a, b, "sub")
    return _freeze(a - b, "sub")


def scale(m: Matrix, c: float) -> Matrix:
    return _freeze(np.multiply(m, c), "scale")


def column_sums(m: Matrix) -> Vector:
    _check_2d(m, "column_sums")
    return _freeze(m.sum(axis=0), "column_sums")


def row_range(m: Matrix, start: int, stop: int) -> Matrix:
    """
    Rows [start, stop) of m, as a copy. The only slicing the kernel offers.
    """
    _check_2d(m, "row_range")
    if not 0 <= start <= stop <= m.shape[0]:
        raise ShapeError(f"row_range: [{start}, {stop}) of {m.shape[0]} rows")
    return _freeze(m[start:stop].copy(), "row_range")


def take_rows(m: Matrix, order: npt.NDArray[np.intp]) -> Matrix:
    _check_2d(m, "take_rows")
    if order.shape != (m.shape[0],):
        raise ShapeError(f"take_rows: {order.shape} for {m.shape[0]} rows")
    return _freeze(m[order], "take_rows")
