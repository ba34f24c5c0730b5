"""
Seeded synthetic data: inputs drawn i.i.d. uniform on [low, high), targets
computed exactly from the inputs.

The generator is numpy's PCG64, whose stream for a given seed is fixed across
platforms and numpy versions; uniform reals come from its 53-bit doubles.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import numpy.typing as npt

from src.guard import ConfigError, Policy
from src.model import tensor as tn
from src.model.data import Dataset, DatasetMeta, Histogram, TargetFunction
from src.model.tensor import ShapeError


def generate(
    target: TargetFunction,
    low: float,
    high: float,
    samples: int,
    seed: int,
) -> Dataset:
    if not low < high:
        raise ConfigError(f"Empty input range [{low}, {high})")
    Policy.SAMPLES.validate(samples)

    rng = np.random.Generator(np.random.PCG64(seed))
    x = low + (high - low) * rng.random((samples, target.n_inputs))
    # low + span * u can round up to high itself
    x = np.minimum(x, np.nextafter(high, low))

    x_mat = tn.as_matrix(x)
    return Dataset(
        x=x_mat,
        y=target.evaluate(x_mat),
        meta=DatasetMeta(target, low, high, seed, samples),
    )


@lru_cache(maxsize=32)
def generate_cached(
    target: TargetFunction,
    low: float,
    high: float,
    samples: int,
    seed: int,
) -> Dataset:
    """
    As generate; every pair in a sweep trains on the same data per target, so
    each worker process builds a dataset only once.
    """
    return generate(target, low, high, samples, seed)


def target_value(target: TargetFunction, x: npt.ArrayLike) -> float:
    row = np.asarray(x, dtype=np.float64)
    if row.shape != (target.n_inputs,):
        raise ShapeError(f"{target} expects {target.n_inputs} inputs: {row}")
    return float(target.evaluate(tn.as_matrix(row))[0, 0])


def histogram(data: Dataset, bins: int) -> Histogram:
    """
    Equal-width bins over [min, max] of all input entries pooled together.
    """
    if bins < 1:
        raise ConfigError(f"Need at least one bin, got {bins}")
    pooled = data.x.ravel()
    counts, edges = np.histogram(
        pooled, bins=bins, range=(pooled.min(), pooled.max())
    )
    return Histogram(edges=edges, counts=counts.astype(np.int64))
