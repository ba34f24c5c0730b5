from __future__ import annotations

import json
import re
from dataclasses import dataclass
from math import inf, isfinite
from pathlib import Path
from typing import Literal

import numpy as np
import numpy.typing as npt
import pandas as pd

from src.guard import ConfigError
from src.model import tensor as tn
from src.model.constants import PRODUCT_NORMALIZERS
from src.model.tensor import Matrix, ShapeError, Vector

TargetKind = Literal["product", "complex", "quotient"]

_PRODUCT_RE = re.compile(r"^product:n=(\d+)(?:,N=([0-9.eE+]+))?$")


@dataclass(frozen=True, order=True)
class TargetFunction:
    """
    The function the network is asked to learn.

        product:  y = (x1 * ... * xn) / N, n in 2..4
        complex:  y = x1 * (x2 + x3) + x4
        quotient: y = x1 / x2
    """

    kind: TargetKind
    n_inputs: int
    normalizer: float = 1.0

    def __post_init__(self) -> None:
        if self.kind == "product":
            if not 2 <= self.n_inputs <= 4:
                raise ConfigError(f"product needs 2-4 inputs: {self}")
        elif self.kind == "complex":
            if self.n_inputs != 4:
                raise ConfigError(f"complex needs exactly 4 inputs: {self}")
        elif self.kind == "quotient":
            if self.n_inputs != 2:
                raise ConfigError(f"quotient needs exactly 2 inputs: {self}")
        else:
            raise ConfigError(f"Unknown target kind {self.kind!r}")
        if not (isfinite(self.normalizer) and self.normalizer >= 1.0):
            raise ConfigError(f"Normalizer must be >= 1: {self.normalizer}")

    @classmethod
    def product(cls, n: int, normalized: bool = False) -> TargetFunction:
        return cls("product", n, PRODUCT_NORMALIZERS[n] if normalized else 1.0)

    @classmethod
    def complex(cls) -> TargetFunction:
        return cls("complex", 4)

    @classmethod
    def quotient(cls) -> TargetFunction:
        return cls("quotient", 2)

    @classmethod
    def parse(cls, spec: str) -> TargetFunction:
        """
        Parses `product:n=2,N=10`, `product:n=3`, `complex` or `quotient`.
        """
        spec = spec.strip()
        if spec == "complex":
            return cls.complex()
        if spec == "quotient":
            return cls.quotient()
        if (m := _PRODUCT_RE.match(spec)) is None:
            raise ConfigError(f"Bad target spec {spec!r}")
        n_str, norm_str = m.groups()
        return cls("product", int(n_str), float(norm_str or 1.0))

    def evaluate(self, x: Matrix) -> Matrix:
        """
        Targets for every row of x, as a column vector.
        """
        if x.ndim != 2 or x.shape[1] != self.n_inputs:
            raise ShapeError(f"{self} expects {self.n_inputs} columns: {x.shape}")
        if self.kind == "product":
            y = np.prod(x, axis=1) / self.normalizer
        elif self.kind == "complex":
            y = x[:, 0] * (x[:, 1] + x[:, 2]) + x[:, 3]
        else:
            y = x[:, 0] / x[:, 1]
        return tn.as_matrix(y.reshape(-1, 1))

    @property
    def spec(self) -> str:
        if self.kind == "product":
            return f"product:n={self.n_inputs},N={self.normalizer:g}"
        return self.kind

    @property
    def expression(self) -> str:
        """
        Human-readable formula, used in table headings.
        """
        if self.kind == "product":
            prod = "".join(f"x{i + 1}" for i in range(self.n_inputs))
            if self.normalizer == 1.0:
                return prod
            return f"{prod}/{self.normalizer:g}"
        if self.kind == "complex":
            return "x1(x2+x3)+x4"
        return "x1/x2"

    def __str__(self) -> str:
        return self.spec


@dataclass(frozen=True)
class DatasetMeta:
    target: TargetFunction
    range_low: float
    range_high: float
    seed: int
    sample_count: int

    def to_dict(self) -> dict[str, object]:
        return {
            "target": self.target.kind,
            "n": self.target.n_inputs,
            "N": self.target.normalizer,
            "low": self.range_low,
            "high": self.range_high,
            "seed": self.seed,
            "samples": self.sample_count,
        }

    @classmethod
    def from_dict(cls, d: dict[str, object]) -> DatasetMeta:
        try:
            return cls(
                target=TargetFunction(
                    d["target"], int(d["n"]), float(d["N"])  # type: ignore
                ),
                range_low=float(d["low"]),  # type: ignore
                range_high=float(d["high"]),  # type: ignore
                seed=int(d["seed"]),  # type: ignore
                sample_count=int(d["samples"]),  # type: ignore
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed dataset metadata: {e}") from e


@dataclass(frozen=True)
class Dataset:

    x: Matrix
    y: Matrix
    meta: DatasetMeta

    def __post_init__(self) -> None:
        if self.x.shape != (self.meta.sample_count, self.meta.target.n_inputs):
            raise ShapeError(f"Dataset X {self.x.shape} vs {self.meta}")
        if self.y.shape != (self.meta.sample_count, 1):
            raise ShapeError(f"Dataset y {self.y.shape} vs {self.meta}")

    @property
    def n_inputs(self) -> int:
        return self.meta.target.n_inputs

    def __len__(self) -> int:
        return self.meta.sample_count

    def to_frame(self) -> pd.DataFrame:
        cols = [f"x{i + 1}" for i in range(self.n_inputs)]
        df = pd.DataFrame(self.x, columns=cols)
        df["y"] = self.y[:, 0]
        return df

    def save(self, path: Path) -> None:
        """
        Writes `path` (CSV) and the metadata sidecar `path` with a .json suffix.
        """
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, float_format="%.17g")
        path.with_suffix(".json").write_text(
            json.dumps(self.meta.to_dict(), indent=2)
        )

    @classmethod
    def load(cls, path: Path) -> Dataset:
        sidecar = path.with_suffix(".json")
        if not sidecar.exists():
            raise ConfigError(f"Missing metadata sidecar {sidecar}")
        meta = DatasetMeta.from_dict(json.loads(sidecar.read_text()))
        df = pd.read_csv(path, dtype=np.float64, float_precision="round_trip")
        cols = [f"x{i + 1}" for i in range(meta.target.n_inputs)]
        if list(df.columns) != cols + ["y"]:
            raise ConfigError(f"{path}: unexpected columns {list(df.columns)}")
        return cls(
            x=tn.as_matrix(df[cols].to_numpy()),
            y=tn.as_matrix(df[["y"]].to_numpy()),
            meta=meta,
        )


@dataclass(frozen=True)
class Histogram:
    edges: Vector
    counts: npt.NDArray[np.int64]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "left": self.edges[:-1],
                "right": self.edges[1:],
                "count": self.counts,
            }
        )


@dataclass(frozen=True)
class EvalReport:
    pair: tuple[str, str]
    target: TargetFunction
    test_mae: float
    test_pct_err: float
    diverged: bool = False

    def __post_init__(self) -> None:
        if self.diverged:
            assert self.test_mae == inf and self.test_pct_err == inf
        else:
            assert self.test_mae >= 0 and self.test_pct_err >= 0

    @classmethod
    def diverged_for(
        cls, pair: tuple[str, str], target: TargetFunction
    ) -> EvalReport:
        return cls(pair, target, inf, inf, diverged=True)


@dataclass(frozen=True)
class TrialResult:
    pair: tuple[str, str]
    target: TargetFunction
    losses: tuple[float, ...]
    report: EvalReport
    wall_s: float = 0.0

    def __post_init__(self) -> None:
        if self.diverged:
            assert self.report.test_pct_err == inf

    @property
    def diverged(self) -> bool:
        return self.report.diverged or any(
            not isfinite(loss) for loss in self.losses
        )

    @property
    def final_train_loss(self) -> float:
        if not self.losses or self.diverged:
            return inf
        return self.losses[-1]

    @property
    def sort_key(self) -> tuple[str, str, TargetFunction]:
        return self.pair[0], self.pair[1], self.target

    @property
    def label(self) -> str:
        return f"{self.pair[0]}_{self.pair[1]}"
